#include "randquad/global_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "randquad/parallel.hpp"
#include "randquad/stats.hpp"

namespace randquad {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kSigmas = 4.0;

double autonomous_green(ComplexPoint c, const EstimatorOptions& options, double* error = nullptr) {
  const ParameterLaw law = PointMass{c};
  const GreenEstimate e = green_point({0.0, 0.0}, ParameterStream(law, {}), options.green());
  if (error) *error = e.error_bound;
  return e.value;
}

std::vector<double> differences(const GreenSamples& a, const GreenSamples& b) {
  std::vector<double> d(a.values.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.values[i] - b.values[i];
  return d;
}

}  // namespace

std::uint64_t purpose_seed(std::uint64_t master, SeedPurpose purpose) {
  return derive_seed(master, static_cast<std::uint64_t>(purpose));
}

GreenSamples sample_green_at_origin(const ParameterLaw& law, std::size_t N, const EstimatorOptions& options) {
  GreenSamples out;
  out.values.resize(N);
  out.error_bounds.resize(N);
  out.escaped.resize(N);
  const GreenOptions green = options.green();
  parallel_for(N, options.threads, [&](std::size_t i) {
    const GreenEstimate e = green_point({0.0, 0.0}, ParameterStream(law, {options.master_seed, i}), green);
    out.values[i] = e.value;
    out.error_bounds[i] = e.error_bound;
    out.escaped[i] = e.escaped ? 1 : 0;
  });
  return out;
}

GlobalGreenEstimate summarize_green(const ParameterLaw& law, const GreenSamples& samples) {
  GlobalGreenEstimate g;
  const stats::MeanStderr ms = stats::summarize(samples.values);
  g.mean = ms.mean;
  g.std_dev = ms.std_dev;
  g.std_error = ms.std_error;
  g.samples = samples.values.size();
  std::size_t stuck = 0;
  for (std::size_t i = 0; i < samples.values.size(); ++i) {
    if (!samples.escaped[i]) ++stuck;
    g.truncation_bound = std::max(g.truncation_bound, samples.error_bounds[i]);
    g.max_sample = std::max(g.max_sample, samples.values[i]);
  }
  g.non_escape_fraction = g.samples ? static_cast<double>(stuck) / static_cast<double>(g.samples) : 0.0;
  g.upper_bound = std::log(escape_radius(law.radius_bound()).R0) + 1.0;
  g.law = law;
  return g;
}

GlobalGreenEstimate global_green(const ParameterLaw& law, std::size_t N, const EstimatorOptions& options) {
  if (N < 100) throw std::invalid_argument("global_green: N must be at least 100");
  return summarize_green(law, sample_green_at_origin(law, N, options));
}

DimensionReport dimension_from_g0(const GlobalGreenEstimate& g0) {
  DimensionReport r;
  r.g0 = g0;
  r.chi = kLn2 + g0.mean;
  r.dimension = kLn2 / r.chi;
  const double g_hi = g0.mean + kSigmas * g0.std_error;
  const double g_lo = std::max(0.0, g0.mean - kSigmas * g0.std_error);
  r.dim_lo = kLn2 / (kLn2 + g_hi);
  r.dim_hi = kLn2 / (kLn2 + g_lo);
  r.alpha0 = kLn2 / (kLn2 + std::log(escape_radius(g0.law.radius_bound()).R0));
  return r;
}

DimensionReport dimension_report(const ParameterLaw& law, std::size_t N, const EstimatorOptions& options) {
  return dimension_from_g0(global_green(law, N, options));
}

ExponentIdentity exponent_identity_check(const ParameterLaw& law, std::size_t omegas, std::size_t depth, std::size_t N,
                                         const EstimatorOptions& options) {
  if (omegas == 0) throw std::invalid_argument("exponent_identity_check: need at least one omega");
  const ComplexPoint z0 = default_basepoint(law.radius_bound());
  const std::uint64_t seed = purpose_seed(options.master_seed, SeedPurpose::ExponentTrees);
  std::vector<double> chi(omegas);
  parallel_for(omegas, options.threads, [&](std::size_t i) {
    const ParameterSequence omega =
        materialize(StratifiedStream(law, {seed, i}, i, omegas), depth, law.tag(), SeedSpec{seed, i});
    chi[i] = lyapunov_from_measure(exact_preimage_tree(z0, omega, depth));
  });
  ExponentIdentity out;
  const stats::MeanStderr ms = stats::summarize(chi);
  out.chi_measure = ms.mean;
  out.chi_measure_se = ms.std_error;
  out.g0 = global_green(law, N, options);
  out.chi_green = kLn2 + out.g0.mean;
  out.difference = out.chi_measure - out.chi_green;
  out.omegas = omegas;
  out.depth = depth;
  return out;
}

ContinuityRow continuity_row(double R, double h, std::size_t N, const EstimatorOptions& options) {
  if (R < 0.0 || h < 0.0) throw std::invalid_argument("continuity_row: R and h must be non-negative");
  const ParameterLaw a = UniformDisc{{0.0, 0.0}, R};
  const ParameterLaw b = UniformDisc{{0.0, 0.0}, R + h};
  const GreenSamples sa = sample_green_at_origin(a, N, options);
  const GreenSamples sb = sample_green_at_origin(b, N, options);
  const stats::MeanStderr d = stats::summarize(differences(sb, sa));
  ContinuityRow row;
  row.R = R;
  row.h = h;
  row.g_R = stats::summarize(sa.values).mean;
  row.g_Rh = stats::summarize(sb.values).mean;
  row.difference = d.mean;
  row.difference_se = d.std_error;
  row.ci_lo = d.mean - kSigmas * d.std_error;
  row.ci_hi = d.mean + kSigmas * d.std_error;
  return row;
}

std::vector<ContinuityRow> continuity_scan(const std::vector<double>& R_grid, const std::vector<double>& h_list,
                                           std::size_t N, const EstimatorOptions& options) {
  std::vector<ContinuityRow> rows;
  for (const double R : R_grid) {
    for (const double h : h_list) rows.push_back(continuity_row(R, h, N, options));
  }
  return rows;
}

bool continuity_trend_ok(const std::vector<ContinuityRow>& rows) {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double slack = kSigmas * std::hypot(rows[k - 1].difference_se, rows[k].difference_se);
    if (std::abs(rows[k].difference) > std::abs(rows[k - 1].difference) + slack) return false;
  }
  return true;
}

std::vector<AsymptoticRow> asymptotic_check(const std::vector<double>& R_list, double delta, std::size_t N,
                                            const EstimatorOptions& options, bool throw_on_violation) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("asymptotic_check: delta must lie in (0, 1)");
  std::vector<AsymptoticRow> rows;
  for (const double R : R_list) {
    if (!(R > 1.0)) throw std::invalid_argument("asymptotic_check: R must exceed 1");
    AsymptoticRow row;
    row.R = R;
    row.g = global_green(UniformDisc{{0.0, 0.0}, R}, N, options);
    row.ratio = row.g.mean / std::log(R);
    row.lower = 0.5 * (1.0 - delta * delta) * std::log(delta * R);
    double upper_error = 0.0;
    row.upper = autonomous_green({R, 0.0}, options, &upper_error);
    const double band = kSigmas * row.g.std_error;
    row.sandwich = row.lower <= row.g.mean - band && row.g.mean + band <= row.upper;
    row.dominated = row.g.max_sample <= row.upper + upper_error + row.g.truncation_bound;
    row.dimension = kLn2 / (kLn2 + row.g.mean);
    row.dimension_log_R = row.dimension * std::log(R);
    if (throw_on_violation && !row.sandwich) {
      throw Error(ErrorCode::SandwichViolation, "R = " + std::to_string(R) + ": estimate " +
                                                    std::to_string(row.g.mean) + " +- " + std::to_string(band) +
                                                    " leaves [" + std::to_string(row.lower) + ", " +
                                                    std::to_string(row.upper) + "]");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

FastEscapeFit fast_escape_fit(const ParameterLaw& law, int k_min, int k_max, std::size_t N,
                              const EstimatorOptions& options) {
  if (k_min < 0 || k_max < k_min || k_max > 60) throw std::invalid_argument("fast_escape_fit: bad k range");
  FastEscapeFit fit;
  fit.samples = N;
  fit.tol = std::min(options.tol, std::ldexp(1e-3, -k_max));
  EstimatorOptions fine = options;
  fine.tol = fit.tol;
  const GreenSamples s = sample_green_at_origin(law, N, fine);
  std::vector<double> xs, ys;
  bool any = false;
  for (int k = k_min; k <= k_max; ++k) {
    const double threshold = std::ldexp(1.0, -k);
    const auto below = std::count_if(s.values.begin(), s.values.end(), [&](double v) { return v < threshold; });
    const double p = static_cast<double>(below) / static_cast<double>(N);
    fit.k_values.push_back(k);
    fit.probabilities.push_back(p);
    any = any || below > 0;
    if (static_cast<double>(below) >= 10.0) {
      fit.fitted_k.push_back(k);
      xs.push_back(k);
      ys.push_back(std::log(p));
    }
  }
  if (!any) {
    fit.all_escaped_instantly = true;
    fit.gamma_hat = std::numeric_limits<double>::infinity();
    return fit;
  }
  if (xs.size() >= 2) {
    const stats::LinearFit lf = stats::least_squares(xs, ys);
    fit.gamma_hat = -lf.slope;
    fit.fit_quality = lf.r_squared;
    fit.fit_available = true;
  }
  return fit;
}

MandelbrotExterior mandelbrot_exterior(ComplexPoint c, std::size_t max_iterations) {
  MandelbrotExterior out;
  ComplexPoint z = 0.0, dz = 0.0;  // f^n_c(0) and its c-derivative
  std::size_t n = 0;
  for (; n < max_iterations; ++n) {
    dz = 2.0 * z * dz + 1.0;
    z = z * z + c;
    if (std::abs(z) > 2.0) break;
  }
  if (n == max_iterations) return out;
  out.escaped = true;
  out.iterations = n + 1;
  // Continue to a large modulus so 2^-n ln|z| is close to its limit.
  std::size_t k = n + 1;
  while (std::abs(z) < 1e40) {
    dz = 2.0 * z * dz + 1.0;
    z = z * z + c;
    ++k;
  }
  // G(c) = lim 2^{1-k} ln|f^k_c(0)|, gradient from the holomorphic logarithm.
  const double scale = std::ldexp(1.0, 1 - static_cast<int>(k));
  out.green = scale * std::log(std::abs(z));
  out.gradient = scale * std::abs(dz / z);
  out.distance_lower = std::sinh(out.green) / (2.0 * std::exp(out.green) * out.gradient);
  return out;
}

double perturbation_radius(ComplexPoint c0) {
  const MandelbrotExterior m = mandelbrot_exterior(c0);
  if (!m.escaped) {
    throw Error(ErrorCode::InsideMandelbrot, "critical orbit of c0 stays in D(0, 2) for 10^4 iterations");
  }
  return std::min(0.25 * m.distance_lower, 0.1);
}

ConstancyReport perturbation_constancy(ComplexPoint c0, const std::vector<double>& deltas, std::size_t N,
                                       const EstimatorOptions& options) {
  ConstancyReport report;
  report.c0 = c0;
  report.delta0 = perturbation_radius(c0);
  for (const double d : deltas) {
    if (!(d >= 0.0) || d > report.delta0) {
      throw std::invalid_argument("perturbation_constancy: delta " + std::to_string(d) + " outside [0, delta0 = " +
                                  std::to_string(report.delta0) + "]");
    }
  }
  report.reference = autonomous_green(c0, options, &report.reference_error);
  for (const double d : deltas) {
    ConstancyRow row;
    row.delta = d;
    const ParameterLaw law = Perturbation{c0, {d, 0.0}};
    const ParameterLaw rotated = rotate_law(law, {0.0, 1.0});
    const GreenSamples s = sample_green_at_origin(law, N, options);
    const GreenSamples r = sample_green_at_origin(rotated, N, options);
    row.g = summarize_green(law, s);
    row.rotated = summarize_green(rotated, r);
    row.reference = report.reference;
    row.abs_difference = std::abs(row.g.mean - report.reference);
    row.allowed = kSigmas * row.g.std_error + 1e-9;
    row.pass = row.abs_difference <= row.allowed;
    const stats::MeanStderr diff = stats::summarize(differences(s, r));
    row.rotation_difference = diff.mean;
    row.rotation_se = diff.std_error;
    row.rotation_pass = std::abs(diff.mean) <= kSigmas * diff.std_error + 1e-9;
    report.rows.push_back(std::move(row));
  }
  return report;
}

HarmonicityReport harmonicity_check(ComplexPoint c0, double r, std::size_t m, std::size_t N, std::size_t omegas,
                                    const EstimatorOptions& options) {
  HarmonicityReport out;
  out.c0 = c0;
  out.r = r;
  out.m = m;
  out.omegas = omegas;
  out.delta0 = perturbation_radius(c0);
  if (m < 8) throw std::invalid_argument("harmonicity_check: need m >= 8 rotations");
  if (!(r >= 0.0) || (r > 0.0 && !(r < out.delta0))) {
    throw std::invalid_argument("harmonicity_check: r must lie in [0, delta0)");
  }
  std::vector<ComplexPoint> etas(m);
  for (std::size_t j = 0; j < m; ++j) etas[j] = std::polar(1.0, 2.0 * std::numbers::pi * j / m);

  const ParameterLaw center_law = Perturbation{c0, {0.0, 0.0}};
  const GreenSamples center = sample_green_at_origin(center_law, N, options);
  out.center = stats::summarize(center.values).mean;
  std::vector<double> offsets(m), se2(m);
  for (std::size_t j = 0; j < m; ++j) {
    const ParameterLaw law = Perturbation{c0, r * etas[j]};
    const GreenSamples s = sample_green_at_origin(law, N, options);
    const stats::MeanStderr ms = stats::summarize(s.values);
    out.rotation_means.push_back(ms.mean);
    offsets[j] = stats::summarize(differences(s, center)).mean;
    se2[j] = ms.std_error * ms.std_error;
  }
  const double mean_offset = stats::pairwise_sum(offsets) / static_cast<double>(m);
  out.circle_average = out.center + mean_offset;
  out.residual = std::abs(mean_offset);
  out.pooled_se = std::sqrt(stats::pairwise_sum(se2) / static_cast<double>(m));
  out.pass = out.residual <= kSigmas * out.pooled_se;

  // Fixed omega: the same unit-disc draws v_k under every rotation.
  const std::uint64_t seed = purpose_seed(options.master_seed, SeedPurpose::HarmonicityOmegas);
  std::vector<double> residual(omegas), allowed(omegas);
  const GreenOptions green = options.green();
  parallel_for(omegas, options.threads, [&](std::size_t i) {
    const GreenEstimate c = green_point({0.0, 0.0}, ParameterStream(center_law, {seed, i}), green);
    std::vector<double> off(m);
    double err = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const ParameterLaw law = Perturbation{c0, r * etas[j]};
      const GreenEstimate e = green_point({0.0, 0.0}, ParameterStream(law, {seed, i}), green);
      off[j] = e.value - c.value;
      err += e.error_bound;
    }
    residual[i] = std::abs(stats::pairwise_sum(off) / static_cast<double>(m));
    allowed[i] = err / static_cast<double>(m) + c.error_bound;
  });
  for (std::size_t i = 0; i < omegas; ++i) {
    out.max_omega_residual = std::max(out.max_omega_residual, residual[i]);
    out.max_omega_allowed = std::max(out.max_omega_allowed, allowed[i]);
    if (residual[i] > allowed[i]) ++out.omega_failures;
  }
  return out;
}

StabilityReport stability_check(ComplexPoint c0, const std::vector<double>& deltas, std::size_t points,
                                const EstimatorOptions& options, std::size_t sample_depth,
                                std::size_t reference_depth) {
  StabilityReport report;
  report.c0 = c0;
  report.delta0 = perturbation_radius(c0);
  report.sample_depth = sample_depth;
  report.reference_depth = reference_depth;
  for (const double d : deltas) {
    if (!(d >= 0.0) || d > report.delta0) {
      throw std::invalid_argument("stability_check: delta " + std::to_string(d) + " exceeds delta0");
    }
  }
  const ParameterLaw autonomous = PointMass{c0};
  const ParameterSequence fixed = sample_prefix(autonomous, {}, reference_depth);
  const MeasurePointCloud reference =
      exact_preimage_tree(default_basepoint(autonomous.radius_bound()), fixed, reference_depth);
  report.reference_points = reference.size();

  const std::uint64_t param_seed = purpose_seed(options.master_seed, SeedPurpose::StabilityParameters);
  const std::uint64_t coin_seed = purpose_seed(options.master_seed, SeedPurpose::Coins);
  for (const double d : deltas) {
    const ParameterLaw law = Perturbation{c0, {d, 0.0}};
    const ComplexPoint z0 = default_basepoint(law.radius_bound());
    std::vector<ComplexPoint> samples(points);
    parallel_for(points, options.threads, [&](std::size_t p) {
      const ParameterSequence omega = sample_prefix(law, {param_seed, p}, sample_depth);
      samples[p] = backward_orbit_sample(z0, omega, sample_depth, {coin_seed, p});
    });
    StabilityRow row;
    row.delta = d;
    row.points = points;
    row.distance = directed_hausdorff(samples, reference.points);
    row.min_modulus = std::numeric_limits<double>::infinity();
    for (const ComplexPoint& z : samples) row.min_modulus = std::min(row.min_modulus, std::abs(z));
    report.rows.push_back(row);
  }
  return report;
}

LocalDimensionReport local_dimension_check(const ParameterLaw& law, std::size_t omegas, std::size_t mass,
                                           std::size_t targets, std::size_t depth, std::size_t green_samples,
                                           const EstimatorOptions& options, const LocalDimensionOptions& fit_options) {
  if (omegas == 0) throw std::invalid_argument("local_dimension_check: need at least one omega");
  const ComplexPoint z0 = default_basepoint(law.radius_bound());
  const std::uint64_t omega_seed = purpose_seed(options.master_seed, SeedPurpose::LocalDimensionOmegas);
  const std::uint64_t mass_seed = purpose_seed(options.master_seed, SeedPurpose::MassSamples);
  const std::uint64_t target_seed = purpose_seed(options.master_seed, SeedPurpose::TargetSamples);
  std::vector<double> pooled, radii, log_measure;
  for (std::size_t w = 0; w < omegas; ++w) {
    const ParameterSequence omega = sample_prefix(law, {omega_seed, w}, depth);
    const MeasurePointCloud m = backward_samples(z0, omega, depth, mass, derive_seed(mass_seed, w), options.threads);
    const MeasurePointCloud t =
        backward_samples(z0, omega, depth, targets, derive_seed(target_seed, w), options.threads);
    const std::vector<double> slopes =
        local_dimension_slopes(m.points, t.points, fit_options, w == 0 ? &radii : nullptr,
                               w == 0 ? &log_measure : nullptr);
    pooled.insert(pooled.end(), slopes.begin(), slopes.end());
  }
  LocalDimensionReport out;
  out.fit = summarize_slopes(std::move(pooled), fit_options);
  out.fit.radii = std::move(radii);
  out.fit.log_measure = std::move(log_measure);
  const GlobalGreenEstimate g = global_green(law, green_samples, options);
  out.g0 = g.mean;
  out.g0_se = g.std_error;
  out.predicted = kLn2 / (kLn2 + g.mean);
  out.relative_error = std::abs(out.fit.slope - out.predicted) / out.predicted;
  out.omegas = omegas;
  return out;
}

}  // namespace randquad
