#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "randquad/core_dynamics.hpp"
#include "randquad/equilibrium_measure.hpp"
#include "randquad/random_systems.hpp"

// Monte-Carlo estimators over i.i.d. parameter laws. Sample i of an ensemble
// always reads the stream SeedSpec{master, i}; two ensembles with the same
// master therefore share their unit-disc draws (common random numbers).

namespace randquad {

struct EstimatorOptions {
  double tol = kDefaultTolerance;
  std::size_t depth_cap = kDefaultDepthCap;
  std::uint64_t master_seed = 0;
  unsigned threads = 0;  // 0: environment / hardware default

  GreenOptions green() const { return {tol, depth_cap}; }
};

// Independent purposes derived from one master seed.
enum class SeedPurpose : std::uint64_t {
  GreenSamples = 1,
  ExponentTrees = 2,
  MassSamples = 3,
  TargetSamples = 4,
  Coins = 5,
  StabilityParameters = 6,
  ReferenceCoins = 7,
  HarmonicityOmegas = 8,
  LocalDimensionOmegas = 9,
};

std::uint64_t purpose_seed(std::uint64_t master, SeedPurpose purpose);

struct GreenSamples {
  std::vector<double> values;
  std::vector<double> error_bounds;
  std::vector<std::uint8_t> escaped;
};

// green_point(0, sigma) for the N streams {master, 0..N-1} of `law`.
GreenSamples sample_green_at_origin(const ParameterLaw& law, std::size_t N, const EstimatorOptions& options);

struct GlobalGreenEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(N)
  double std_dev = 0.0;
  std::size_t samples = 0;
  double non_escape_fraction = 0.0;
  double truncation_bound = 0.0;  // max certified per-sample error
  double max_sample = 0.0;
  double upper_bound = 0.0;  // ln R0 + 1, never exceeded by a sample
  ParameterLaw law;
};

GlobalGreenEstimate summarize_green(const ParameterLaw& law, const GreenSamples& samples);

// Requires N >= 100.
GlobalGreenEstimate global_green(const ParameterLaw& law, std::size_t N, const EstimatorOptions& options);

struct DimensionReport {
  GlobalGreenEstimate g0;
  double chi = 0.0;        // ln 2 + g0
  double dimension = 0.0;  // ln 2 / chi
  double dim_lo = 0.0, dim_hi = 0.0;  // from g0 +- 4 stderr, g clamped at 0
  double alpha0 = 0.0;     // ln 2 / (ln 2 + ln R0)
};

DimensionReport dimension_from_g0(const GlobalGreenEstimate& g0);
DimensionReport dimension_report(const ParameterLaw& law, std::size_t N, const EstimatorOptions& options);

struct ExponentIdentity {
  double chi_measure = 0.0;  // mean over omega of the level-n Lyapunov integral
  double chi_measure_se = 0.0;
  GlobalGreenEstimate g0;
  double chi_green = 0.0;  // ln 2 + g0
  double difference = 0.0;
  std::size_t omegas = 0, depth = 0;
};

// Measure side: exact trees of the given depth for `omegas` parameter
// sequences whose first parameter is stratified. Green side: global_green
// with N samples.
ExponentIdentity exponent_identity_check(const ParameterLaw& law, std::size_t omegas, std::size_t depth, std::size_t N,
                                         const EstimatorOptions& options);

struct ContinuityRow {
  double R = 0.0, h = 0.0;
  double g_R = 0.0, g_Rh = 0.0;
  double difference = 0.0;  // mean of coupled g_{R+h} - g_R
  double difference_se = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // difference +- 4 se
};

// UniformDisc(0, R) against UniformDisc(0, R + h) on common streams.
ContinuityRow continuity_row(double R, double h, std::size_t N, const EstimatorOptions& options);
std::vector<ContinuityRow> continuity_scan(const std::vector<double>& R_grid, const std::vector<double>& h_list,
                                           std::size_t N, const EstimatorOptions& options);

// Rows for one R in decreasing-h order: |d(h_{k+1})| <= |d(h_k)| + 4 sqrt(se_k^2 + se_{k+1}^2).
bool continuity_trend_ok(const std::vector<ContinuityRow>& rows_for_one_R);

struct AsymptoticRow {
  double R = 0.0;
  GlobalGreenEstimate g;
  double ratio = 0.0;  // g / ln R
  double lower = 0.0;  // (1 - delta^2) ln(delta R) / 2
  double upper = 0.0;  // g_{omega_R}(0), autonomous z^2 + R
  bool sandwich = false;    // lower <= g - 4se and g + 4se <= upper
  bool dominated = false;   // every sample <= upper + truncation
  double dimension = 0.0;
  double dimension_log_R = 0.0;
};

// SandwichViolation on a failed row when `throw_on_violation`.
std::vector<AsymptoticRow> asymptotic_check(const std::vector<double>& R_list, double delta, std::size_t N,
                                            const EstimatorOptions& options, bool throw_on_violation = false);

struct FastEscapeFit {
  std::vector<int> k_values;
  std::vector<double> probabilities;  // P(g < 2^-k)
  std::vector<int> fitted_k;  // k with P >= 10 / N
  double gamma_hat = 0.0;     // negated slope of ln P against k
  double fit_quality = 0.0;   // R^2 of that fit
  bool all_escaped_instantly = false;  // every P is 0; gamma reported as +inf
  bool fit_available = false;          // at least two fitted points
  std::size_t samples = 0;
  double tol = 0.0;
};

FastEscapeFit fast_escape_fit(const ParameterLaw& law, int k_min, int k_max, std::size_t N,
                              const EstimatorOptions& options);

struct MandelbrotExterior {
  bool escaped = false;
  std::size_t iterations = 0;
  double green = 0.0;       // parameter-plane Green function = 2 g_c(0)
  double gradient = 0.0;    // |grad G|
  double distance_lower = 0.0;  // sinh(G) / (2 e^G |grad G|)
};

// Critical orbit until |f^n_c(0)| > 2 (membership) and then on to a large
// modulus for the distance estimate.
MandelbrotExterior mandelbrot_exterior(ComplexPoint c, std::size_t max_iterations = 10000);

// min(0.25 * distance lower bound, 0.1). InsideMandelbrot if the critical
// orbit does not escape.
double perturbation_radius(ComplexPoint c0);

struct ConstancyRow {
  double delta = 0.0;
  GlobalGreenEstimate g;
  double reference = 0.0;  // g_{c0}(0)
  double abs_difference = 0.0;
  double allowed = 0.0;  // 4 se + 1e-9
  bool pass = false;
  // lambda = delta against lambda = i delta on common streams.
  GlobalGreenEstimate rotated;
  double rotation_difference = 0.0;
  double rotation_se = 0.0;
  bool rotation_pass = false;
};

struct ConstancyReport {
  ComplexPoint c0{};
  double delta0 = 0.0;
  double reference = 0.0;
  double reference_error = 0.0;
  std::vector<ConstancyRow> rows;
};

// std::invalid_argument for any delta > delta0.
ConstancyReport perturbation_constancy(ComplexPoint c0, const std::vector<double>& deltas, std::size_t N,
                                       const EstimatorOptions& options);

struct HarmonicityReport {
  ComplexPoint c0{};
  double r = 0.0;
  std::size_t m = 0;
  double delta0 = 0.0;
  std::vector<double> rotation_means;
  double circle_average = 0.0;
  double center = 0.0;  // lambda = 0 estimate
  double residual = 0.0;
  double pooled_se = 0.0;  // sqrt(mean se_j^2)
  bool pass = false;
  // Per fixed omega: |mean_j g_{r eta_j, omega}(0) - g_{0, omega}(0)| against
  // the summed certified errors.
  std::size_t omegas = 0;
  double max_omega_residual = 0.0;
  double max_omega_allowed = 0.0;
  std::size_t omega_failures = 0;
};

// Requires r < delta0 and m >= 8.
HarmonicityReport harmonicity_check(ComplexPoint c0, double r, std::size_t m, std::size_t N, std::size_t omegas,
                                    const EstimatorOptions& options);

struct StabilityRow {
  double delta = 0.0;
  double distance = 0.0;   // max over samples of the distance to the reference cloud
  double min_modulus = 0.0;
  std::size_t points = 0;
};

struct StabilityReport {
  ComplexPoint c0{};
  double delta0 = 0.0;
  std::size_t reference_points = 0;
  std::size_t reference_depth = 0;
  std::size_t sample_depth = 0;
  std::vector<StabilityRow> rows;
};

// Each sample point is a depth-`sample_depth` backward sample of its own
// omega ~ Perturbation(c0, delta). Reference: exact tree of f_{c0}.
StabilityReport stability_check(ComplexPoint c0, const std::vector<double>& deltas, std::size_t points,
                                const EstimatorOptions& options, std::size_t sample_depth = 40,
                                std::size_t reference_depth = 18);

struct LocalDimensionReport {
  LocalDimensionFit fit;
  double g0 = 0.0;
  double g0_se = 0.0;
  double predicted = 0.0;  // ln 2 / (ln 2 + g0)
  double relative_error = 0.0;
  std::size_t omegas = 0;
};

// Slopes pooled over `omegas` sequences of `law` (one is enough for a point
// mass), each with independent mass and target samples at the given depth.
// g0 comes from global_green with `green_samples` samples.
LocalDimensionReport local_dimension_check(const ParameterLaw& law, std::size_t omegas, std::size_t mass,
                                           std::size_t targets, std::size_t depth, std::size_t green_samples,
                                           const EstimatorOptions& options,
                                           const LocalDimensionOptions& fit_options = {});

}  // namespace randquad
