#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "randquad/core_dynamics.hpp"
#include "randquad/rng.hpp"

namespace randquad {

inline constexpr std::size_t kDefaultTreeCap = 22;

enum class CloudKind { ExactTree, BackwardSamples };

std::string to_string(CloudKind kind);

// Weighted atoms approximating the harmonic measure mu_omega.
struct MeasurePointCloud {
  std::vector<ComplexPoint> points;
  std::vector<double> weights;
  std::size_t depth = 0;
  CloudKind kind = CloudKind::ExactTree;
  std::string law_tag;
  SeedSpec seed{};
  ComplexPoint basepoint{};

  std::size_t size() const noexcept { return points.size(); }
};

// R0 + 1 on the positive real axis.
ComplexPoint default_basepoint(double radius_bound);

// {+s, -s} with s the principal square root of w - c.
std::array<ComplexPoint, 2> preimage_step(ComplexPoint w, ComplexPoint c) noexcept;

// All 2^n points of (f^n_omega)^-1(z0), weight 2^-n each. The first branching
// uses c_{n-1}, the last c_0; within each branching "+" comes first, so atom i
// corresponds to the binary digits of i read from the top (0 = "+").
MeasurePointCloud exact_preimage_tree(ComplexPoint z0, const ParameterSequence& omega, std::size_t n,
                                      std::size_t tree_cap = kDefaultTreeCap);

// One draw from the level-n preimage measure: preimage_step with c_{n-1},
// ..., c_0, branch picked by coin bits addressed by `coins`.
ComplexPoint backward_orbit_sample(ComplexPoint z0, const ParameterSequence& omega, std::size_t n, SeedSpec coins);

// `count` independent draws; sample i uses coins {coin_master, i}. Result is
// independent of `threads`.
MeasurePointCloud backward_samples(ComplexPoint z0, const ParameterSequence& omega, std::size_t n, std::size_t count,
                                   std::uint64_t coin_master, unsigned threads = 0);

struct PushforwardResult {
  double discrepancy = 0.0;  // max matching distance
  std::size_t atoms = 0;     // level-(n+1) atoms pushed forward
};

// Pushes the depth-(n+1) tree of omega forward by f_{c_0} and matches it, as a
// multiset, against the depth-n tree of sigma(omega) with every atom counted
// twice. Greedy nearest-unmatched matching.
PushforwardResult pushforward_check(const ParameterSequence& omega, ComplexPoint z0, std::size_t n,
                                    std::size_t tree_cap = kDefaultTreeCap);

// max over `from` of the distance to the nearest point of `to`.
double directed_hausdorff(const std::vector<ComplexPoint>& from, const std::vector<ComplexPoint>& to);

// sum_i w_i ln|2 z_i|. AtomAtOrigin if some |z_i| < 1e-300.
double lyapunov_from_measure(const MeasurePointCloud& cloud);

struct LocalDimensionOptions {
  std::size_t j_min = 3;   // r_j = 2^-j * diam
  std::size_t j_max = 12;
  std::size_t min_count = 50;
  std::size_t min_radii = 4;
  std::size_t min_mass = 10000;
  std::size_t bootstrap = 200;
  std::uint64_t bootstrap_seed = 0x5eed;
};

struct LocalDimensionFit {
  std::vector<double> radii;        // strictly decreasing
  std::vector<double> log_measure;  // mean ln mu(D(z, r)) over qualifying targets
  double slope = 0.0;               // median over targets
  double std_error = 0.0;           // bootstrap standard error of the median
  std::size_t points_used = 0;      // targets with a fit
  std::vector<double> target_slopes;
};

// Per-target slope of ln mu_hat(D(z, r)) against ln r with the given mass
// points, over radii where the count is >= min_count. Targets with fewer than
// min_radii qualifying radii are skipped (absent from the result).
std::vector<double> local_dimension_slopes(const std::vector<ComplexPoint>& mass,
                                           const std::vector<ComplexPoint>& targets,
                                           const LocalDimensionOptions& options = {},
                                           std::vector<double>* radii_out = nullptr,
                                           std::vector<double>* log_measure_out = nullptr);

// Median of the target slopes plus bootstrap stderr. InsufficientCounts if no
// target qualifies. The mass and targets must come from independent draws.
LocalDimensionFit local_dimension_fit(const std::vector<ComplexPoint>& mass, const std::vector<ComplexPoint>& targets,
                                      const LocalDimensionOptions& options = {});

// Median plus bootstrap stderr of an already pooled slope list.
LocalDimensionFit summarize_slopes(std::vector<double> slopes, const LocalDimensionOptions& options = {});

struct BoxCountingFit {
  std::vector<double> scales;  // epsilon, decreasing
  std::vector<std::size_t> occupied;
  double dimension = 0.0;
  double r_squared = 0.0;
};

// Occupied-cell counts on the grids of side epsilon_j = diam * 2^-j,
// j in [j_min, j_max]; slope of ln N against ln(1/epsilon). At least 1e5
// points are advised. DegenerateCloud if the coarsest grid has < 2 cells.
BoxCountingFit box_counting_fit(const MeasurePointCloud& cloud, std::size_t j_min = 2, std::size_t j_max = 9);
BoxCountingFit box_counting_fit(const MeasurePointCloud& cloud, const std::vector<double>& scales);
double box_counting_dimension(const MeasurePointCloud& cloud, std::size_t j_min = 2, std::size_t j_max = 9);

struct Bounds {
  double re_min = 0.0, re_max = 0.0, im_min = 0.0, im_max = 0.0;
};

Bounds bounding_box(const std::vector<ComplexPoint>& points);
double diameter_estimate(const std::vector<ComplexPoint>& points);  // bounding-box diagonal

struct Raster {
  std::size_t width = 0, height = 0;
  Bounds bounds;
  std::vector<std::uint8_t> pixels;  // row-major, top row = im_max
  std::uint64_t max_count = 0;
};

// Log-density binning: intensity 255 * ln(1 + count) / ln(1 + max_count).
Raster rasterize(const std::vector<ComplexPoint>& points, std::size_t width, std::size_t height, Bounds bounds);

struct JuliaRender {
  MeasurePointCloud cloud;
  Raster raster;
};

// Backward samples of J_omega at depth n plus their raster over the padded
// bounding box (5% margin, square pixels not enforced).
JuliaRender julia_point_cloud(const ParameterSequence& omega, std::size_t n, std::size_t sample_count,
                              std::uint64_t seed, std::size_t width, std::size_t height, unsigned threads = 0);

// Binary PGM (P5). Error(IoError) on failure.
void write_pgm(const Raster& raster, const std::string& path);
// Header re,im,weight; %.17g; LF.
void write_cloud_csv(const MeasurePointCloud& cloud, const std::string& path);

}  // namespace randquad
