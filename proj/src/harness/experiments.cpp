#include "randquad/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "randquad/error.hpp"
#include "randquad/rng.hpp"

namespace randquad::harness {

namespace {

constexpr double kLn2 = std::numbers::ln2;

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

Json point_json(ComplexPoint z) { return Json::array({z.real(), z.imag()}); }

Json green_json(const GlobalGreenEstimate& g) {
  return {{"law", g.law.tag()},
          {"mean", number(g.mean)},
          {"std_error", number(g.std_error)},
          {"std_dev", number(g.std_dev)},
          {"samples", g.samples},
          {"non_escape_fraction", number(g.non_escape_fraction)},
          {"truncation_bound", number(g.truncation_bound)},
          {"max_sample", number(g.max_sample)},
          {"upper_bound", number(g.upper_bound)}};
}

Json dimension_json(const DimensionReport& d) {
  return {{"g0", green_json(d.g0)},
          {"chi", number(d.chi)},
          {"dimension", number(d.dimension)},
          {"dimension_lo", number(d.dim_lo)},
          {"dimension_hi", number(d.dim_hi)},
          {"alpha0", number(d.alpha0)}};
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Sample i of a uniform draw in (0, 1) addressed by (key, counter).
double open_unit(std::uint64_t key, std::uint64_t counter) {
  return (static_cast<double>(counter_bits(key, counter) >> 11) + 0.5) * 0x1.0p-53;
}

// Mixed laws for the pointwise checks: sub-quarter, connected and Cantor
// regimes plus a small perturbation and a fixed list.
std::vector<ParameterLaw> mixed_laws() {
  return {UniformDisc{{0.0, 0.0}, 0.2}, UniformDisc{{0.0, 0.0}, 2.0}, UniformDisc{{0.0, 0.0}, 4.0},
          Perturbation{{1.0, 0.0}, {0.05, 0.0}}, PointMass{{-1.0, 0.0}},
          ExplicitList{{{0.3, 0.1}, {-2.0, 0.0}, {0.0, 1.0}}, ""}};
}

// ---------------------------------------------------------------- commands

void green_point_command(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const ParameterLaw law = parse_law(cfg.raw("law"));
  const ParameterStream omega(law, {cfg.unsigned_integer("seed"), 0});
  const ComplexPoint z = cfg.complex("z");
  const GreenEstimate e = green_point(z, omega, estimator_options(cfg).green());
  rep.results = {{"law", law.tag()},
                 {"z", point_json(z)},
                 {"value", number(e.value)},
                 {"error_bound", number(e.error_bound)},
                 {"escaped", e.escaped},
                 {"escape_depth", e.escape_depth},
                 {"first_escape", e.first_escape == kNoEscape ? Json(nullptr) : Json(e.first_escape)},
                 {"log_abs_iterate", number(e.log_abs_iterate)}};
  rep.claim("value_nonnegative", e.value >= 0.0, fmt("g = %.17g", e.value));
}

void green_claims(const GlobalGreenEstimate& g, ExperimentReport& rep) {
  rep.claim("samples_below_upper_bound", g.max_sample <= g.upper_bound + g.truncation_bound,
            fmt("max sample %.6g, ln R0 + 1 = %.6g", g.max_sample, g.upper_bound));
}

void global_green_command(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const ParameterLaw law = parse_law(cfg.raw("law"));
  const GlobalGreenEstimate g = global_green(law, cfg.count("n"), estimator_options(cfg));
  rep.results = green_json(g);
  green_claims(g, rep);
}

void dimension_command(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const ParameterLaw law = parse_law(cfg.raw("law"));
  const DimensionReport d = dimension_report(law, cfg.count("n"), estimator_options(cfg));
  rep.results = dimension_json(d);
  green_claims(d.g0, rep);
  rep.claim("dimension_in_unit_interval", d.dimension > 0.0 && d.dimension <= 1.0, fmt("%.17g", d.dimension));
}

Table continuity_table(const std::vector<ContinuityRow>& rows) {
  Table t{"continuity", {"R", "h", "g_R", "g_R_plus_h", "difference", "difference_se", "ci_lo", "ci_hi"}, {}};
  for (const ContinuityRow& r : rows) t.add({r.R, r.h, r.g_R, r.g_Rh, r.difference, r.difference_se, r.ci_lo, r.ci_hi});
  return t;
}

// Rows grouped by R in first-appearance order.
std::vector<std::vector<ContinuityRow>> group_by_R(const std::vector<ContinuityRow>& rows) {
  std::vector<std::vector<ContinuityRow>> out;
  for (const ContinuityRow& r : rows) {
    if (out.empty() || out.back().front().R != r.R) out.emplace_back();
    out.back().push_back(r);
  }
  return out;
}

void sweep_r_command(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const auto rows = continuity_scan(cfg.real_list("r_grid"), cfg.real_list("h_list"), cfg.count("n"),
                                    estimator_options(cfg));
  Json arr = Json::array();
  for (const ContinuityRow& r : rows) {
    arr.push_back({{"R", r.R}, {"h", r.h}, {"difference", number(r.difference)},
                   {"difference_se", number(r.difference_se)}});
  }
  rep.results["rows"] = arr;
  for (const auto& group : group_by_R(rows)) {
    rep.claim(fmt("trend_R=%g", group.front().R), continuity_trend_ok(group));
  }
  rep.tables.push_back(continuity_table(rows));
}

Table asymptotic_table(const std::vector<AsymptoticRow>& rows) {
  Table t{"asymptotics",
          {"R", "g", "g_se", "ratio", "lower", "upper", "sandwich", "dominated", "dimension", "dimension_log_R"},
          {}};
  for (const AsymptoticRow& r : rows) {
    t.add({r.R, r.g.mean, r.g.std_error, r.ratio, r.lower, r.upper, static_cast<long long>(r.sandwich),
           static_cast<long long>(r.dominated), r.dimension, r.dimension_log_R});
  }
  return t;
}

Json asymptotic_json(const std::vector<AsymptoticRow>& rows) {
  Json arr = Json::array();
  for (const AsymptoticRow& r : rows) {
    arr.push_back({{"R", r.R}, {"g", green_json(r.g)}, {"ratio", number(r.ratio)}, {"lower", number(r.lower)},
                   {"upper", number(r.upper)}, {"sandwich", r.sandwich}, {"dominated", r.dominated},
                   {"dimension", number(r.dimension)}, {"dimension_log_R", number(r.dimension_log_R)}});
  }
  return arr;
}

void asymptotics_command(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const auto rows = asymptotic_check(cfg.real_list("r_list"), cfg.real("delta"), cfg.count("n"), estimator_options(cfg));
  rep.results["rows"] = asymptotic_json(rows);
  for (const AsymptoticRow& r : rows) {
    rep.claim(fmt("sandwich_R=%g", r.R), r.sandwich,
              fmt("%.6g <= %.6g +- %.2g <= %.6g", r.lower, r.g.mean, 4 * r.g.std_error, r.upper));
    rep.claim(fmt("dominated_R=%g", r.R), r.dominated);
  }
  rep.tables.push_back(asymptotic_table(rows));
}

bool non_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) return false;
  }
  return true;
}

Json fast_escape_json(const FastEscapeFit& f) {
  return {{"k", f.k_values},
          {"probability", f.probabilities},
          {"fitted_k", f.fitted_k},
          {"gamma_hat", number(f.gamma_hat)},
          {"fit_quality", number(f.fit_quality)},
          {"all_escaped_instantly", f.all_escaped_instantly},
          {"fit_available", f.fit_available},
          {"samples", f.samples},
          {"tol", f.tol}};
}

Table fast_escape_table(const FastEscapeFit& f) {
  Table t{"fast_escape", {"k", "probability"}, {}};
  for (std::size_t i = 0; i < f.k_values.size(); ++i) t.add({static_cast<long long>(f.k_values[i]), f.probabilities[i]});
  return t;
}

void fast_escape_command(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const ParameterLaw law = parse_law(cfg.raw("law"));
  const FastEscapeFit f = fast_escape_fit(law, static_cast<int>(cfg.integer("k_min")),
                                          static_cast<int>(cfg.integer("k_max")), cfg.count("n"),
                                          estimator_options(cfg));
  rep.results = fast_escape_json(f);
  rep.results["law"] = law.tag();
  rep.claim("probability_non_increasing", non_increasing(f.probabilities));
  rep.claim("gamma_positive", f.all_escaped_instantly || (f.fit_available && f.gamma_hat > 0.0),
            fmt("gamma = %.6g", f.gamma_hat));
  rep.tables.push_back(fast_escape_table(f));
}

Json constancy_json(const ConstancyReport& c) {
  Json rows = Json::array();
  for (const ConstancyRow& r : c.rows) {
    rows.push_back({{"delta", r.delta}, {"g", green_json(r.g)}, {"abs_difference", number(r.abs_difference)},
                    {"allowed", number(r.allowed)}, {"pass", r.pass},
                    {"rotated", green_json(r.rotated)}, {"rotation_difference", number(r.rotation_difference)},
                    {"rotation_se", number(r.rotation_se)}, {"rotation_pass", r.rotation_pass}});
  }
  return {{"c0", point_json(c.c0)}, {"delta0", number(c.delta0)}, {"reference", number(c.reference)},
          {"reference_error", number(c.reference_error)}, {"rows", rows}};
}

Table constancy_table(const ConstancyReport& c) {
  Table t{"constancy",
          {"delta", "g", "g_se", "reference", "abs_difference", "allowed", "rotated_g", "rotation_difference",
           "rotation_se"},
          {}};
  for (const ConstancyRow& r : c.rows) {
    t.add({r.delta, r.g.mean, r.g.std_error, r.reference, r.abs_difference, r.allowed, r.rotated.mean,
           r.rotation_difference, r.rotation_se});
  }
  return t;
}

void perturb_command(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const ConstancyReport c =
      perturbation_constancy(cfg.complex("c0"), cfg.real_list("deltas"), cfg.count("n"), estimator_options(cfg));
  rep.results = constancy_json(c);
  for (const ConstancyRow& r : c.rows) {
    rep.claim(fmt("constant_delta=%g", r.delta), r.pass, fmt("|diff| %.3g <= %.3g", r.abs_difference, r.allowed));
    rep.claim(fmt("rotation_delta=%g", r.delta), r.rotation_pass,
              fmt("diff %.3g, se %.3g", r.rotation_difference, r.rotation_se));
  }
  rep.tables.push_back(constancy_table(c));
}

Json harmonicity_json(const HarmonicityReport& h) {
  return {{"c0", point_json(h.c0)},
          {"r", h.r},
          {"m", h.m},
          {"delta0", number(h.delta0)},
          {"rotation_means", h.rotation_means},
          {"circle_average", number(h.circle_average)},
          {"center", number(h.center)},
          {"residual", number(h.residual)},
          {"pooled_se", number(h.pooled_se)},
          {"pass", h.pass},
          {"omegas", h.omegas},
          {"max_omega_residual", number(h.max_omega_residual)},
          {"max_omega_allowed", number(h.max_omega_allowed)},
          {"omega_failures", h.omega_failures}};
}

void harmonicity_command(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const HarmonicityReport h = harmonicity_check(cfg.complex("c0"), cfg.real("radius"), cfg.count("rotations"),
                                                cfg.count("n"), cfg.count("omegas"), estimator_options(cfg));
  rep.results = harmonicity_json(h);
  rep.claim("mean_value_residual", h.pass, fmt("%.3g <= 4 * %.3g", h.residual, h.pooled_se));
  rep.claim("per_omega_residual", h.omega_failures == 0,
            fmt("max %.3g, allowed %.3g, failures %zu", h.max_omega_residual, h.max_omega_allowed, h.omega_failures));
  Table t{"rotations", {"j", "eta_re", "eta_im", "mean"}, {}};
  for (std::size_t j = 0; j < h.rotation_means.size(); ++j) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(h.m);
    t.add({static_cast<long long>(j), std::cos(a), std::sin(a), h.rotation_means[j]});
  }
  rep.tables.push_back(t);
}

Json stability_json(const StabilityReport& s) {
  Json rows = Json::array();
  for (const StabilityRow& r : s.rows) {
    rows.push_back({{"delta", r.delta}, {"distance", number(r.distance)}, {"min_modulus", number(r.min_modulus)},
                    {"points", r.points}});
  }
  return {{"c0", point_json(s.c0)}, {"delta0", number(s.delta0)}, {"reference_points", s.reference_points},
          {"reference_depth", s.reference_depth}, {"sample_depth", s.sample_depth}, {"rows", rows}};
}

// Distances ordered by decreasing delta must not grow.
bool stability_trend(const StabilityReport& s) {
  std::vector<StabilityRow> rows = s.rows;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.delta > b.delta; });
  std::vector<double> d;
  for (const auto& r : rows) d.push_back(r.distance);
  return non_increasing(d);
}

void stability_command(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const StabilityReport s = stability_check(cfg.complex("c0"), cfg.real_list("deltas"), cfg.count("points"),
                                            estimator_options(cfg), cfg.count("depth"), cfg.count("tree_cap"));
  rep.results = stability_json(s);
  const double eps = cfg.real("epsilon"), eta = cfg.real("eta");
  Table t{"stability", {"delta", "distance", "min_modulus", "points"}, {}};
  for (const StabilityRow& r : s.rows) {
    rep.claim(fmt("distance_delta=%g", r.delta), r.distance <= eps, fmt("%.4g <= %.4g", r.distance, eps));
    rep.claim(fmt("min_modulus_delta=%g", r.delta), r.min_modulus > eta, fmt("%.4g > %.4g", r.min_modulus, eta));
    t.add({r.delta, r.distance, r.min_modulus, static_cast<long long>(r.points)});
  }
  rep.claim("distance_shrinks_with_delta", stability_trend(s));
  rep.tables.push_back(t);
}

void julia_render_command(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const ParameterLaw law = parse_law(cfg.raw("law"));
  const std::uint64_t seed = cfg.unsigned_integer("seed");
  const std::size_t depth = cfg.count("depth");
  const ParameterSequence omega = sample_prefix(law, {seed, 0}, depth);
  JuliaRender render = julia_point_cloud(omega, depth, cfg.count("points"), purpose_seed(seed, SeedPurpose::Coins),
                                         cfg.count("width"), cfg.count("height"), estimator_options(cfg).threads);
  const Bounds& b = render.raster.bounds;
  rep.results = {{"law", law.tag()},
                 {"depth", depth},
                 {"points", render.cloud.size()},
                 {"bounds", {{"re_min", b.re_min}, {"re_max", b.re_max}, {"im_min", b.im_min}, {"im_max", b.im_max}}},
                 {"max_count", render.raster.max_count},
                 {"image", "image.pgm"},
                 {"cloud", "points.csv"}};
  Table param{"omega", {"k", "re", "im"}, {}};
  for (std::size_t k = 0; k < omega.size(); ++k) {
    param.add({static_cast<long long>(k), omega.at(k).real(), omega.at(k).imag()});
  }
  rep.tables.push_back(param);
  try {
    const BoxCountingFit box = box_counting_fit(render.cloud);
    rep.results["box_counting_dimension"] = number(box.dimension);
    rep.results["box_counting_r_squared"] = number(box.r_squared);
    Table t{"box_counting", {"epsilon", "occupied"}, {}};
    for (std::size_t i = 0; i < box.scales.size(); ++i) {
      t.add({box.scales[i], static_cast<long long>(box.occupied[i])});
    }
    rep.tables.push_back(t);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateCloud) throw;
    rep.results["box_counting_dimension"] = nullptr;
  }
  rep.render = std::move(render);
}

LocalDimensionOptions fit_options(const ExperimentConfig& cfg) {
  LocalDimensionOptions o;
  o.j_min = cfg.count("j_min");
  o.j_max = cfg.count("j_max");
  o.min_count = cfg.count("min_count");
  if (o.j_max <= o.j_min) throw Error(ErrorCode::ConfigError, "field 'j_max': must exceed j_min");
  return o;
}

Json local_dimension_json(const LocalDimensionReport& r) {
  return {{"slope", number(r.fit.slope)},
          {"slope_se", number(r.fit.std_error)},
          {"targets_used", r.fit.points_used},
          {"g0", number(r.g0)},
          {"g0_se", number(r.g0_se)},
          {"predicted", number(r.predicted)},
          {"relative_error", number(r.relative_error)},
          {"omegas", r.omegas}};
}

void local_dim_command(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const ParameterLaw law = parse_law(cfg.raw("law"));
  const LocalDimensionReport r =
      local_dimension_check(law, cfg.count("omegas"), cfg.count("mass"), cfg.count("targets"), cfg.count("depth"),
                            cfg.count("n"), estimator_options(cfg), fit_options(cfg));
  rep.results = local_dimension_json(r);
  rep.results["law"] = law.tag();
  const double rel_tol = cfg.real("rel_tol");
  rep.claim("slope_matches_formula", r.relative_error <= rel_tol,
            fmt("slope %.4f, ln2/(ln2+g0) %.4f, rel %.4f <= %.3g", r.fit.slope, r.predicted, r.relative_error, rel_tol));
  Table curve{"log_measure", {"radius", "mean_log_measure"}, {}};
  for (std::size_t i = 0; i < r.fit.radii.size(); ++i) curve.add({r.fit.radii[i], r.fit.log_measure[i]});
  rep.tables.push_back(curve);
  Table slopes{"target_slopes", {"slope"}, {}};
  for (const double s : r.fit.target_slopes) slopes.add({s});
  rep.tables.push_back(slopes);
}

// ---------------------------------------------------------------- criteria

struct Sizes {
  std::size_t scale = 1;
  std::size_t n(std::size_t base) const { return base * scale; }
};

EstimatorOptions criterion_options(std::uint64_t seed, unsigned threads) {
  EstimatorOptions o;
  o.master_seed = seed;
  o.threads = threads;
  return o;
}

CriterionResult criterion_closed_form(std::uint64_t seed, const Sizes& sz) {
  const ParameterLaw law = PointMass{{0.0, 0.0}};
  const ParameterStream omega(law, {seed, 0});
  const std::uint64_t key = derive_seed(seed, 1001);
  const std::size_t count = sz.n(100);
  double max_err = 0.0, max_bound = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i < count; ++i) {
    const double r = 1.0 + 9.0 * open_unit(key, 2 * i);
    const ComplexPoint z = std::polar(r, 2.0 * std::numbers::pi * open_unit(key, 2 * i + 1));
    const GreenEstimate e = green_point(z, omega, {1e-9, kDefaultDepthCap});
    const double err = std::abs(e.value - std::log(r));
    max_err = std::max(max_err, err);
    max_bound = std::max(max_bound, e.error_bound);
    ok = ok && e.escaped && err <= e.error_bound && e.error_bound <= 1e-9;
  }
  CriterionResult out;
  out.pass = ok;
  out.detail = fmt("%zu points, max |g - ln|z|| %.3g, max bound %.3g <= 1e-9", count, max_err, max_bound);
  out.results = {{"points", count}, {"max_error", max_err}, {"max_bound", max_bound}};
  return out;
}

CriterionResult criterion_functional_equation(std::uint64_t seed, const Sizes& sz) {
  const std::vector<ParameterLaw> laws = mixed_laws();
  const std::uint64_t key = derive_seed(seed, 1002);
  const std::size_t wanted = sz.n(1000);
  std::size_t tried = 0, found = 0, violations = 0;
  double worst_ratio = 0.0;
  while (found < wanted && tried < 100 * wanted) {
    const std::size_t i = tried++;
    const ParameterLaw& law = laws[i % laws.size()];
    const ParameterStream omega(law, {key, i});
    const double r = 3.0 * std::sqrt(open_unit(key ^ 0x2a, 2 * i));
    const ComplexPoint z = std::polar(r, 2.0 * std::numbers::pi * open_unit(key ^ 0x2a, 2 * i + 1));
    try {
      const FunctionalEquationCheck c = green_functional_equation_residual(z, omega);
      ++found;
      if (c.residual > c.bound) ++violations;
      worst_ratio = std::max(worst_ratio, c.residual / c.bound);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonEscaping) throw;
    }
  }
  CriterionResult out;
  out.pass = found == wanted && violations == 0;
  out.detail = fmt("%zu escaped pairs, %zu violations, max residual/bound %.3g", found, violations, worst_ratio);
  out.results = {{"pairs", found}, {"candidates", tried}, {"violations", violations},
                 {"max_residual_over_bound", worst_ratio}};
  return out;
}

CriterionResult criterion_pushforward(std::uint64_t seed, const Sizes& sz) {
  const std::vector<ParameterLaw> laws = mixed_laws();
  const std::uint64_t key = derive_seed(seed, 1003);
  const std::size_t omegas = sz.n(100);
  constexpr std::size_t kMaxDepth = 10;
  double worst = 0.0;
  std::size_t checks = 0;
  for (std::size_t w = 0; w < omegas; ++w) {
    const ParameterLaw& law = laws[w % laws.size()];
    const ParameterSequence omega = sample_prefix(law, {key, w}, kMaxDepth + 1);
    const ComplexPoint z0 = default_basepoint(law.radius_bound());
    for (std::size_t n = 0; n <= kMaxDepth; ++n) {
      worst = std::max(worst, pushforward_check(omega, z0, n).discrepancy);
      ++checks;
    }
  }
  CriterionResult out;
  out.pass = worst <= 1e-9;
  out.detail = fmt("%zu omegas, depths 0..10, max matching distance %.3g <= 1e-9", omegas, worst);
  out.results = {{"omegas", omegas}, {"checks", checks}, {"max_discrepancy", worst}};
  return out;
}

CriterionResult criterion_exponent(std::uint64_t seed, unsigned threads, const Sizes& sz) {
  const ExponentIdentity e =
      exponent_identity_check(UniformDisc{{0.0, 0.0}, 4.0}, sz.n(200), 18, sz.n(100000), criterion_options(seed, threads));
  CriterionResult out;
  out.pass = std::abs(e.difference) <= 0.02;
  out.detail = fmt("measure %.5f (se %.2g), ln2 + g0 %.5f, |diff| %.4f <= 0.02", e.chi_measure, e.chi_measure_se,
                   e.chi_green, std::abs(e.difference));
  out.results = {{"chi_measure", e.chi_measure}, {"chi_measure_se", e.chi_measure_se}, {"chi_green", e.chi_green},
                 {"g0", green_json(e.g0)}, {"difference", e.difference}, {"omegas", e.omegas}, {"depth", e.depth}};
  return out;
}

CriterionResult criterion_sub_quarter(std::uint64_t seed, unsigned threads, const Sizes& sz) {
  EstimatorOptions o = criterion_options(seed, threads);
  o.depth_cap = 2000;
  const DimensionReport d = dimension_report(UniformDisc{{0.0, 0.0}, 0.2}, sz.n(10000), o);
  CriterionResult out;
  out.pass = d.g0.mean < 1e-6 && d.dimension == 1.0;
  out.detail = fmt("g0 %.3g < 1e-6, dimension %.17g, non-escape fraction %.3g", d.g0.mean, d.dimension,
                   d.g0.non_escape_fraction);
  out.results = dimension_json(d);
  return out;
}

CriterionResult criterion_asymptotics(std::uint64_t seed, unsigned threads, const Sizes& sz) {
  const auto rows = asymptotic_check({1e2, 1e4, 1e6}, 0.1, sz.n(10000), criterion_options(seed, threads));
  bool band = true, sandwich = true, dominated = true, approach = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    band = band && rows[i].ratio >= 0.40 && rows[i].ratio <= 0.60;
    sandwich = sandwich && rows[i].sandwich;
    dominated = dominated && rows[i].dominated;
    if (i > 0) approach = approach && std::abs(rows[i].ratio - 0.5) < std::abs(rows[i - 1].ratio - 0.5);
  }
  const double dim_log = rows.back().dimension_log_R;
  const bool dim_ok = dim_log >= 1.2 && dim_log <= 1.6;
  CriterionResult out;
  out.pass = band && sandwich && dominated && approach && dim_ok;
  out.detail = fmt("ratios %.4f %.4f %.4f (band %d, toward 0.5 %d), sandwich %d, dominated %d, dim*lnR %.4f in "
                   "[1.2, 1.6]",
                   rows[0].ratio, rows[1].ratio, rows[2].ratio, band, approach, sandwich, dominated, dim_log);
  out.results = {{"rows", asymptotic_json(rows)}};
  return out;
}

CriterionResult criterion_continuity(std::uint64_t seed, unsigned threads, const Sizes& sz) {
  const auto rows = continuity_scan({0.5, 2.0, 8.0}, {0.1, 0.05, 0.025}, sz.n(20000), criterion_options(seed, threads));
  bool ok = true;
  std::string detail;
  for (const auto& g : group_by_R(rows)) {
    const bool t = continuity_trend_ok(g);
    ok = ok && t;
    detail += fmt("R=%g: %.3g %.3g %.3g (%s); ", g.front().R, g[0].difference, g[1].difference, g[2].difference,
                  t ? "ok" : "broken");
  }
  Json arr = Json::array();
  for (const ContinuityRow& r : rows) {
    arr.push_back({{"R", r.R}, {"h", r.h}, {"difference", r.difference}, {"difference_se", r.difference_se}});
  }
  CriterionResult out;
  out.pass = ok;
  out.detail = detail.substr(0, detail.size() - 2);
  out.results = {{"rows", arr}};
  return out;
}

CriterionResult criterion_constancy(std::uint64_t seed, unsigned threads, const Sizes& sz) {
  const ConstancyReport c =
      perturbation_constancy({1.0, 0.0}, {0.01, 0.03, 0.05}, sz.n(100000), criterion_options(seed, threads));
  bool ok = true;
  double worst = 0.0, worst_rot = 0.0;
  for (const ConstancyRow& r : c.rows) {
    ok = ok && r.pass && r.rotation_pass;
    worst = std::max(worst, r.abs_difference / r.allowed);
    worst_rot = std::max(worst_rot, std::abs(r.rotation_difference) / (4.0 * r.rotation_se));
  }
  CriterionResult out;
  out.pass = ok;
  out.detail = fmt("g1(0) %.10f, max |diff|/allowed %.3g, max rotation |diff|/(4 se) %.3g", c.reference, worst,
                   worst_rot);
  out.results = constancy_json(c);
  return out;
}

CriterionResult criterion_harmonicity(std::uint64_t seed, unsigned threads, const Sizes& sz) {
  const HarmonicityReport h =
      harmonicity_check({1.0, 0.0}, 0.03, 16, sz.n(20000), sz.n(100), criterion_options(seed, threads));
  CriterionResult out;
  out.pass = h.pass && h.omega_failures == 0;
  out.detail = fmt("residual %.3g <= 4 * pooled se %.3g; %zu omegas, max residual %.3g, allowed %.3g", h.residual,
                   h.pooled_se, h.omegas, h.max_omega_residual, h.max_omega_allowed);
  out.results = harmonicity_json(h);
  return out;
}

CriterionResult criterion_local_dimension(std::uint64_t seed, unsigned threads, const Sizes& sz) {
  const EstimatorOptions o = criterion_options(seed, threads);
  const LocalDimensionReport a = local_dimension_check(PointMass{{4.0, 0.0}}, 1, sz.n(100000), 400, 40, 1000, o);
  const LocalDimensionReport b =
      local_dimension_check(UniformDisc{{0.0, 0.0}, 3.0}, 8, sz.n(100000), 400, 40, sz.n(20000), o);
  // Box counting on the same kind of cloud, for the gap between the support
  // dimension and the dimension of the measure.
  const ParameterSequence c4 = sample_prefix(PointMass{{4.0, 0.0}}, {}, 40);
  const MeasurePointCloud cloud = backward_samples(default_basepoint(4.0), c4, 40, sz.n(100000),
                                                   derive_seed(seed, 1010), threads);
  const BoxCountingFit box = box_counting_fit(cloud);
  CriterionResult out;
  out.pass = a.relative_error <= 0.10 && b.relative_error <= 0.10;
  out.detail = fmt("c=4: slope %.4f vs %.4f (rel %.4f); uniform(0,0,3): slope %.4f vs %.4f (rel %.4f); <= 0.10",
                   a.fit.slope, a.predicted, a.relative_error, b.fit.slope, b.predicted, b.relative_error);
  out.results = {{"autonomous_c4", local_dimension_json(a)},
                 {"uniform_disc_3", local_dimension_json(b)},
                 {"box_counting_c4", number(box.dimension)}};
  return out;
}

CriterionResult criterion_fast_escape(std::uint64_t seed, unsigned threads, const Sizes& sz) {
  const FastEscapeFit f = fast_escape_fit(UniformDisc{{0.0, 0.0}, 1.0}, 1, 8, sz.n(100000),
                                          criterion_options(seed, threads));
  const bool mono = non_increasing(f.probabilities);
  CriterionResult out;
  out.pass = mono && f.fit_available && f.gamma_hat > 0.0;
  std::string ps;
  for (const double p : f.probabilities) ps += fmt("%.4f ", p);
  out.detail = fmt("P = %snon-increasing %d, gamma %.4f (R^2 %.3f)", ps.c_str(), mono, f.gamma_hat, f.fit_quality);
  out.results = fast_escape_json(f);
  return out;
}

CriterionResult criterion_stability(std::uint64_t seed, unsigned threads, const Sizes& sz) {
  const StabilityReport s = stability_check({1.0, 0.0}, {0.05, 0.02, 0.01}, sz.n(20000),
                                            criterion_options(seed, threads), 40, 18);
  bool ok = true;
  std::string d;
  for (const StabilityRow& r : s.rows) {
    ok = ok && r.distance <= 0.1 && r.min_modulus > 0.2;
    d += fmt("delta %g: dist %.4f, min|z| %.4f; ", r.delta, r.distance, r.min_modulus);
  }
  const bool trend = stability_trend(s);
  CriterionResult out;
  out.pass = ok && trend;
  out.detail = d + fmt("shrinking %d", trend);
  out.results = stability_json(s);
  return out;
}

// Same computations at 1, 4 and 16 workers must agree bit for bit.
CriterionResult criterion_determinism(std::uint64_t seed, const Sizes&) {
  const ParameterLaw law = UniformDisc{{0.0, 0.0}, 4.0};
  const ParameterSequence omega = sample_prefix(law, {seed, 0}, 30);
  const ComplexPoint z0 = default_basepoint(law.radius_bound());
  std::vector<GreenSamples> green;
  std::vector<MeasurePointCloud> clouds;
  for (const unsigned t : {1u, 4u, 16u}) {
    green.push_back(sample_green_at_origin(law, 4000, criterion_options(seed, t)));
    clouds.push_back(backward_samples(z0, omega, 30, 4000, derive_seed(seed, 1013), t));
  }
  bool same = true;
  for (std::size_t i = 1; i < green.size(); ++i) {
    same = same && green[i].values == green[0].values && green[i].error_bounds == green[0].error_bounds &&
           clouds[i].points == clouds[0].points;
  }
  CriterionResult out;
  out.pass = same;
  out.detail = same ? "green samples and backward samples identical at 1, 4, 16 threads" : "thread count changed output";
  out.results = {{"threads", {1, 4, 16}}, {"identical", same}};
  return out;
}

}  // namespace

EstimatorOptions estimator_options(const ExperimentConfig& cfg) {
  EstimatorOptions o;
  o.tol = cfg.real("tol");
  o.depth_cap = cfg.count("depth_cap");
  o.master_seed = cfg.unsigned_integer("seed");
  o.threads = static_cast<unsigned>(cfg.count("threads"));
  if (!(o.tol > 0.0)) throw Error(ErrorCode::ConfigError, "field 'tol': must be positive");
  return o;
}

Budget parse_budget(const std::string& text) {
  if (text == "small") return Budget::Small;
  if (text == "full") return Budget::Full;
  throw Error(ErrorCode::ConfigError, "field 'budget': '" + text + "' is not 'small' or 'full'");
}

const std::vector<CriterionInfo>& criteria() {
  static const std::vector<CriterionInfo> list = {
      {1, "closed-form Green values", 1.0},
      {2, "functional equation", 10.0},
      {3, "pushforward identity", 60.0},
      {4, "exponent identity", 300.0},
      {5, "sub-quarter regime", 120.0},
      {6, "asymptotics", 300.0},
      {7, "continuity scan", 300.0},
      {8, "perturbation constancy", 300.0},
      {9, "harmonicity", 300.0},
      {10, "local dimension vs formula", 600.0},
      {11, "fast-escape decay", 300.0},
      {12, "stability", 300.0},
      {13, "thread determinism (spot check)", 60.0},
  };
  return list;
}

CriterionResult run_criterion(int id, Budget budget, std::uint64_t seed, unsigned threads) {
  const Sizes sz{budget == Budget::Full ? 10u : 1u};
  const auto start = Clock::now();
  CriterionResult r;
  switch (id) {
    case 1: r = criterion_closed_form(seed, sz); break;
    case 2: r = criterion_functional_equation(seed, sz); break;
    case 3: r = criterion_pushforward(seed, sz); break;
    case 4: r = criterion_exponent(seed, threads, sz); break;
    case 5: r = criterion_sub_quarter(seed, threads, sz); break;
    case 6: r = criterion_asymptotics(seed, threads, sz); break;
    case 7: r = criterion_continuity(seed, threads, sz); break;
    case 8: r = criterion_constancy(seed, threads, sz); break;
    case 9: r = criterion_harmonicity(seed, threads, sz); break;
    case 10: r = criterion_local_dimension(seed, threads, sz); break;
    case 11: r = criterion_fast_escape(seed, threads, sz); break;
    case 12: r = criterion_stability(seed, threads, sz); break;
    case 13: r = criterion_determinism(seed, sz); break;
    default: throw std::invalid_argument("run_criterion: unknown criterion " + std::to_string(id));
  }
  r.id = id;
  r.name = criteria().at(static_cast<std::size_t>(id - 1)).name;
  r.seconds = seconds_since(start);
  return r;
}

ExperimentReport verify_all(Budget budget, std::uint64_t seed, unsigned threads) {
  ExperimentReport rep;
  rep.command = "verify-all";
  rep.results["budget"] = budget == Budget::Full ? "full" : "small";
  rep.results["seed"] = seed;
  Json list = Json::array();
  Table t{"criteria", {"id", "name", "pass", "detail"}, {}};
  for (const CriterionInfo& info : criteria()) {
    const CriterionResult r = run_criterion(info.id, budget, seed, threads);
    rep.claim(fmt("criterion_%d", r.id), r.pass, r.name + ": " + r.detail);
    list.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"results", r.results}});
    t.add({static_cast<long long>(r.id), r.name, static_cast<long long>(r.pass), r.detail});
    rep.timings.push_back({fmt("criterion_%d", r.id), r.seconds});
  }
  rep.results["criteria"] = list;
  rep.tables.push_back(t);
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  using Handler = void (*)(const ExperimentConfig&, ExperimentReport&);
  static const std::map<std::string, Handler> handlers = {
      {"green-point", green_point_command}, {"global-green", global_green_command},
      {"dimension", dimension_command},     {"sweep-r", sweep_r_command},
      {"asymptotics", asymptotics_command}, {"fast-escape", fast_escape_command},
      {"perturb", perturb_command},         {"harmonicity", harmonicity_command},
      {"stability", stability_command},     {"julia-render", julia_render_command},
      {"local-dim", local_dim_command},
  };
  const auto start = Clock::now();
  ExperimentReport rep;
  if (cfg.command() == "verify-all") {
    rep = verify_all(parse_budget(cfg.raw("budget")), cfg.unsigned_integer("seed"),
                     static_cast<unsigned>(cfg.count("threads")));
  } else {
    rep.command = cfg.command();
    handlers.at(cfg.command())(cfg, rep);
    rep.timings.push_back({"run", seconds_since(start)});
  }
  for (const auto& [k, v] : cfg.resolved(false)) rep.config[k] = v;
  return rep;
}

}  // namespace randquad::harness
