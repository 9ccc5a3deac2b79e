#include "randquad/equilibrium_measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>
#include <unordered_map>

#include "randquad/parallel.hpp"
#include "randquad/stats.hpp"

namespace randquad {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_for_write(const std::string& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  return f;
}

// Uniform grid over a point set; each point carries a remaining multiplicity.
class PointGrid {
 public:
  PointGrid(const std::vector<ComplexPoint>& points, std::size_t multiplicity) : points_(points) {
    remaining_.assign(points.size(), multiplicity);
    const Bounds b = bounding_box(points);
    origin_ = {b.re_min, b.im_min};
    const double extent = std::max({b.re_max - b.re_min, b.im_max - b.im_min, 1e-300});
    const double side = std::ceil(std::sqrt(static_cast<double>(points.size())));
    cell_ = extent / std::max(side, 1.0);
    side_ = static_cast<std::int64_t>(side) + 1;
    for (std::size_t i = 0; i < points.size(); ++i) cells_[key(cell_of(points[i]))].push_back(i);
  }

  // Distance from q to the nearest point with remaining multiplicity, which is
  // then consumed. Infinity once everything is used up.
  double take_nearest(ComplexPoint q) {
    const auto [cx, cy] = cell_of(q);
    const std::int64_t reach = std::max({std::abs(cx), std::abs(cx - side_), std::abs(cy), std::abs(cy - side_)}) + 1;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    auto consider = [&](std::size_t i) {
      if (remaining_[i] == 0) return;
      const double d = std::abs(points_[i] - q);
      if (d < best || (d == best && i < best_index)) {
        best = d;
        best_index = i;
      }
    };
    auto visit = [&](std::int64_t x, std::int64_t y) {
      const auto it = cells_.find(key({x, y}));
      if (it != cells_.end()) for (const std::size_t i : it->second) consider(i);
    };
    if (reach > 4 * side_ + 64) {
      for (std::size_t i = 0; i < points_.size(); ++i) consider(i);
    } else {
      for (std::int64_t ring = 0; ring <= reach; ++ring) {
        if (ring == 0) {
          visit(cx, cy);
        } else {
          for (std::int64_t d = -ring; d <= ring; ++d) {
            visit(cx + d, cy - ring);
            visit(cx + d, cy + ring);
          }
          for (std::int64_t d = -ring + 1; d <= ring - 1; ++d) {
            visit(cx - ring, cy + d);
            visit(cx + ring, cy + d);
          }
        }
        // Cells in later rings are at least ring * cell_ away.
        if (best <= static_cast<double>(ring) * cell_) break;
      }
    }
    if (std::isfinite(best)) --remaining_[best_index];
    return best;
  }

 private:
  std::pair<std::int64_t, std::int64_t> cell_of(ComplexPoint z) const {
    const double x = std::floor((z.real() - origin_.real()) / cell_);
    const double y = std::floor((z.imag() - origin_.imag()) / cell_);
    constexpr double lim = 1e9;
    return {static_cast<std::int64_t>(std::clamp(x, -lim, lim)), static_cast<std::int64_t>(std::clamp(y, -lim, lim))};
  }
  static std::uint64_t key(std::pair<std::int64_t, std::int64_t> c) {
    return (static_cast<std::uint64_t>(c.first) << 32) ^ static_cast<std::uint32_t>(c.second);
  }

  const std::vector<ComplexPoint>& points_;
  std::vector<std::size_t> remaining_;
  ComplexPoint origin_;
  double cell_ = 1.0;
  std::int64_t side_ = 1;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

std::vector<ComplexPoint> tree_points(ComplexPoint z0, const ParameterSequence& omega, std::size_t n) {
  std::vector<ComplexPoint> level{z0};
  for (std::size_t step = 0; step < n; ++step) {
    const ComplexPoint c = omega.at(n - 1 - step);
    std::vector<ComplexPoint> next(level.size() * 2);
    for (std::size_t i = 0; i < level.size(); ++i) {
      const auto pair = preimage_step(level[i], c);
      next[2 * i] = pair[0];
      next[2 * i + 1] = pair[1];
    }
    level = std::move(next);
  }
  return level;
}

}  // namespace

std::string to_string(CloudKind kind) {
  return kind == CloudKind::ExactTree ? "exact_tree" : "backward_samples";
}

ComplexPoint default_basepoint(double radius_bound) { return {escape_radius(radius_bound).R0 + 1.0, 0.0}; }

std::array<ComplexPoint, 2> preimage_step(ComplexPoint w, ComplexPoint c) noexcept {
  const ComplexPoint s = std::sqrt(w - c);
  return {s, -s};
}

MeasurePointCloud exact_preimage_tree(ComplexPoint z0, const ParameterSequence& omega, std::size_t n,
                                      std::size_t tree_cap) {
  if (n > tree_cap) {
    throw Error(ErrorCode::TreeTooDeep,
                "tree depth " + std::to_string(n) + " exceeds cap " + std::to_string(tree_cap));
  }
  if (n > omega.size()) {
    throw Error(ErrorCode::PrefixTooShort, "tree depth " + std::to_string(n) + " needs " + std::to_string(n) +
                                               " parameters, have " + std::to_string(omega.size()));
  }
  MeasurePointCloud cloud;
  cloud.points = tree_points(z0, omega, n);
  cloud.weights.assign(cloud.points.size(), std::ldexp(1.0, -static_cast<int>(n)));
  cloud.depth = n;
  cloud.kind = CloudKind::ExactTree;
  cloud.law_tag = omega.law_tag();
  cloud.seed = omega.seed();
  cloud.basepoint = z0;
  return cloud;
}

ComplexPoint backward_orbit_sample(ComplexPoint z0, const ParameterSequence& omega, std::size_t n, SeedSpec coins) {
  if (n > omega.size()) {
    throw Error(ErrorCode::PrefixTooShort, "backward sample of depth " + std::to_string(n) + " from " +
                                               std::to_string(omega.size()) + " parameters");
  }
  const std::uint64_t key = coins.subseed();
  ComplexPoint z = z0;
  std::uint64_t word = 0;
  for (std::size_t step = 0; step < n; ++step) {
    if (step % 64 == 0) word = counter_bits(key, step / 64);
    const auto pair = preimage_step(z, omega.at(n - 1 - step));
    z = pair[(word >> (step % 64)) & 1U];
  }
  return z;
}

MeasurePointCloud backward_samples(ComplexPoint z0, const ParameterSequence& omega, std::size_t n, std::size_t count,
                                   std::uint64_t coin_master, unsigned threads) {
  if (count == 0) throw std::invalid_argument("backward_samples: count must be positive");
  if (n > omega.size()) {
    throw Error(ErrorCode::PrefixTooShort, "backward samples of depth " + std::to_string(n) + " from " +
                                               std::to_string(omega.size()) + " parameters");
  }
  MeasurePointCloud cloud;
  cloud.points.resize(count);
  parallel_for(count, threads, [&](std::size_t i) {
    cloud.points[i] = backward_orbit_sample(z0, omega, n, SeedSpec{coin_master, i});
  });
  cloud.weights.assign(count, 1.0 / static_cast<double>(count));
  cloud.depth = n;
  cloud.kind = CloudKind::BackwardSamples;
  cloud.law_tag = omega.law_tag();
  cloud.seed = omega.seed();
  cloud.basepoint = z0;
  return cloud;
}

PushforwardResult pushforward_check(const ParameterSequence& omega, ComplexPoint z0, std::size_t n,
                                    std::size_t tree_cap) {
  if (n + 1 > tree_cap) {
    throw Error(ErrorCode::TreeTooDeep, "pushforward at depth " + std::to_string(n) + " needs a tree of depth " +
                                            std::to_string(n + 1) + " > cap " + std::to_string(tree_cap));
  }
  const MeasurePointCloud fine = exact_preimage_tree(z0, omega, n + 1, tree_cap);
  const ParameterSequence tail = [&] {
    std::vector<ComplexPoint> rest(omega.prefix().begin() + 1, omega.prefix().end());
    return ParameterSequence(std::move(rest), omega.radius_bound(), omega.law_tag(), omega.seed(), omega.offset() + 1);
  }();
  const MeasurePointCloud coarse = exact_preimage_tree(z0, tail, n, tree_cap);

  const ComplexPoint c0 = omega.at(0);
  PointGrid grid(coarse.points, 2);
  PushforwardResult out;
  out.atoms = fine.points.size();
  for (const ComplexPoint& y : fine.points) out.discrepancy = std::max(out.discrepancy, grid.take_nearest(y * y + c0));
  return out;
}

double directed_hausdorff(const std::vector<ComplexPoint>& from, const std::vector<ComplexPoint>& to) {
  if (to.empty()) throw std::invalid_argument("directed_hausdorff: empty reference set");
  PointGrid grid(to, std::numeric_limits<std::size_t>::max());
  double worst = 0.0;
  for (const ComplexPoint& z : from) worst = std::max(worst, grid.take_nearest(z));
  return worst;
}

double lyapunov_from_measure(const MeasurePointCloud& cloud) {
  if (cloud.points.empty() || cloud.points.size() != cloud.weights.size()) {
    throw std::invalid_argument("lyapunov_from_measure: empty or inconsistent cloud");
  }
  std::vector<double> terms(cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const double r = std::abs(cloud.points[i]);
    if (r < 1e-300) throw Error(ErrorCode::AtomAtOrigin, "atom " + std::to_string(i) + " sits at the origin");
    terms[i] = cloud.weights[i] * std::log(2.0 * r);
  }
  return stats::pairwise_sum(terms);
}

Bounds bounding_box(const std::vector<ComplexPoint>& points) {
  if (points.empty()) return {};
  Bounds b{points[0].real(), points[0].real(), points[0].imag(), points[0].imag()};
  for (const ComplexPoint& z : points) {
    b.re_min = std::min(b.re_min, z.real());
    b.re_max = std::max(b.re_max, z.real());
    b.im_min = std::min(b.im_min, z.imag());
    b.im_max = std::max(b.im_max, z.imag());
  }
  return b;
}

double diameter_estimate(const std::vector<ComplexPoint>& points) {
  const Bounds b = bounding_box(points);
  return std::hypot(b.re_max - b.re_min, b.im_max - b.im_min);
}

std::vector<double> local_dimension_slopes(const std::vector<ComplexPoint>& mass,
                                           const std::vector<ComplexPoint>& targets,
                                           const LocalDimensionOptions& options, std::vector<double>* radii_out,
                                           std::vector<double>* log_measure_out) {
  if (mass.size() < options.min_mass) {
    throw std::invalid_argument("local_dimension_fit: need at least " + std::to_string(options.min_mass) +
                                " mass samples, got " + std::to_string(mass.size()));
  }
  if (options.j_max < options.j_min || options.min_radii < 2) {
    throw std::invalid_argument("local_dimension_fit: bad radius window");
  }
  const double diam = diameter_estimate(mass);
  if (!(diam > 0.0)) throw Error(ErrorCode::DegenerateCloud, "mass samples have zero extent");
  const std::size_t nr = options.j_max - options.j_min + 1;
  std::vector<double> radii(nr), log_r(nr);
  for (std::size_t j = 0; j < nr; ++j) {
    radii[j] = std::ldexp(diam, -static_cast<int>(options.j_min + j));
    log_r[j] = std::log(radii[j]);
  }
  const double inv_diam_sq = 1.0 / (diam * diam);
  const double log_mass = std::log(static_cast<double>(mass.size()));

  std::vector<double> sum_log(nr, 0.0);
  std::vector<std::size_t> hits(nr, 0);
  std::vector<double> slopes;
  std::vector<std::size_t> hist(nr);
  for (const ComplexPoint& t : targets) {
    std::fill(hist.begin(), hist.end(), 0);
    for (const ComplexPoint& m : mass) {
      // With q^2 = f 2^e, f in [0.5, 1): q < 2^-j iff j <= -e/2.
      const double q2 = std::norm(m - t) * inv_diam_sq;
      std::int64_t deepest;
      if (q2 == 0.0) {
        deepest = static_cast<std::int64_t>(options.j_max);
      } else {
        int e = 0;
        std::frexp(q2, &e);
        deepest = static_cast<std::int64_t>(std::floor(-e / 2.0));
      }
      if (deepest < static_cast<std::int64_t>(options.j_min)) continue;
      hist[std::min<std::size_t>(static_cast<std::size_t>(deepest) - options.j_min, nr - 1)]++;
    }
    std::vector<double> xs, ys;
    std::size_t cumulative = 0;
    std::vector<std::size_t> counts(nr);
    for (std::size_t j = nr; j-- > 0;) {
      cumulative += hist[j];
      counts[j] = cumulative;
    }
    for (std::size_t j = 0; j < nr && counts[j] >= options.min_count; ++j) {
      const double lm = std::log(static_cast<double>(counts[j])) - log_mass;
      xs.push_back(log_r[j]);
      ys.push_back(lm);
      sum_log[j] += lm;
      ++hits[j];
    }
    if (xs.size() >= options.min_radii) slopes.push_back(stats::least_squares(xs, ys).slope);
  }
  if (radii_out || log_measure_out) {
    std::vector<double> r, lm;
    for (std::size_t j = 0; j < nr && hits[j] > 0; ++j) {
      r.push_back(radii[j]);
      lm.push_back(sum_log[j] / static_cast<double>(hits[j]));
    }
    if (radii_out) *radii_out = std::move(r);
    if (log_measure_out) *log_measure_out = std::move(lm);
  }
  return slopes;
}

LocalDimensionFit summarize_slopes(std::vector<double> slopes, const LocalDimensionOptions& options) {
  if (slopes.empty()) {
    throw Error(ErrorCode::InsufficientCounts, "no target has " + std::to_string(options.min_radii) +
                                                   " radii with at least " + std::to_string(options.min_count) +
                                                   " hits");
  }
  LocalDimensionFit fit;
  fit.slope = stats::median(slopes);
  fit.points_used = slopes.size();
  if (options.bootstrap > 1) {
    std::vector<double> medians(options.bootstrap);
    std::vector<double> resample(slopes.size());
    const std::uint64_t key = mix64(options.bootstrap_seed);
    const double n = static_cast<double>(slopes.size());
    for (std::size_t b = 0; b < options.bootstrap; ++b) {
      for (std::size_t i = 0; i < slopes.size(); ++i) {
        const double u = to_unit(counter_bits(key, b * slopes.size() + i));
        resample[i] = slopes[std::min(static_cast<std::size_t>(u * n), slopes.size() - 1)];
      }
      medians[b] = stats::median(resample);
    }
    fit.std_error = stats::summarize(medians).std_dev;
  }
  fit.target_slopes = std::move(slopes);
  return fit;
}

LocalDimensionFit local_dimension_fit(const std::vector<ComplexPoint>& mass, const std::vector<ComplexPoint>& targets,
                                      const LocalDimensionOptions& options) {
  std::vector<double> radii, log_measure;
  LocalDimensionFit fit = summarize_slopes(local_dimension_slopes(mass, targets, options, &radii, &log_measure), options);
  fit.radii = std::move(radii);
  fit.log_measure = std::move(log_measure);
  return fit;
}

BoxCountingFit box_counting_fit(const MeasurePointCloud& cloud, const std::vector<double>& scales) {
  if (scales.size() < 2) throw std::invalid_argument("box_counting_fit: need at least two scales");
  const Bounds b = bounding_box(cloud.points);
  BoxCountingFit fit;
  fit.scales = scales;
  std::vector<double> xs, ys;
  std::vector<std::uint64_t> keys(cloud.points.size());
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const double eps = scales[s];
    if (!(eps > 0.0)) throw Error(ErrorCode::DegenerateCloud, "box counting needs a cloud of positive extent");
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      const auto ix = static_cast<std::uint64_t>((cloud.points[i].real() - b.re_min) / eps);
      const auto iy = static_cast<std::uint64_t>((cloud.points[i].imag() - b.im_min) / eps);
      keys[i] = (ix << 32) | (iy & 0xffffffffULL);
    }
    std::sort(keys.begin(), keys.end());
    const auto cells = static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
    if (s == 0 && cells < 2) {
      throw Error(ErrorCode::DegenerateCloud, "only " + std::to_string(cells) + " occupied cell at the coarsest scale");
    }
    fit.occupied.push_back(cells);
    xs.push_back(-std::log(eps));
    ys.push_back(std::log(static_cast<double>(cells)));
  }
  const stats::LinearFit lf = stats::least_squares(xs, ys);
  fit.dimension = lf.slope;
  fit.r_squared = lf.r_squared;
  return fit;
}

BoxCountingFit box_counting_fit(const MeasurePointCloud& cloud, std::size_t j_min, std::size_t j_max) {
  if (j_max <= j_min) throw std::invalid_argument("box_counting_fit: need j_max > j_min");
  const double diam = diameter_estimate(cloud.points);
  if (!(diam > 0.0)) throw Error(ErrorCode::DegenerateCloud, "cloud has zero extent");
  std::vector<double> scales;
  for (std::size_t j = j_min; j <= j_max; ++j) scales.push_back(std::ldexp(diam, -static_cast<int>(j)));
  return box_counting_fit(cloud, scales);
}

double box_counting_dimension(const MeasurePointCloud& cloud, std::size_t j_min, std::size_t j_max) {
  return box_counting_fit(cloud, j_min, j_max).dimension;
}

Raster rasterize(const std::vector<ComplexPoint>& points, std::size_t width, std::size_t height, Bounds bounds) {
  if (width == 0 || height == 0) throw std::invalid_argument("rasterize: width and height must be positive");
  const double w = bounds.re_max - bounds.re_min;
  const double h = bounds.im_max - bounds.im_min;
  if (!(w > 0.0) || !(h > 0.0)) throw std::invalid_argument("rasterize: empty bounds");
  std::vector<std::uint64_t> counts(width * height, 0);
  for (const ComplexPoint& z : points) {
    const double fx = (z.real() - bounds.re_min) / w * static_cast<double>(width);
    const double fy = (bounds.im_max - z.imag()) / h * static_cast<double>(height);
    if (!(fx >= 0.0) || !(fy >= 0.0) || fx >= static_cast<double>(width) || fy >= static_cast<double>(height)) continue;
    ++counts[static_cast<std::size_t>(fy) * width + static_cast<std::size_t>(fx)];
  }
  Raster r;
  r.width = width;
  r.height = height;
  r.bounds = bounds;
  r.max_count = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  r.pixels.assign(counts.size(), 0);
  if (r.max_count > 0) {
    const double scale = 255.0 / std::log1p(static_cast<double>(r.max_count));
    for (std::size_t i = 0; i < counts.size(); ++i) {
      r.pixels[i] = static_cast<std::uint8_t>(std::lround(scale * std::log1p(static_cast<double>(counts[i]))));
    }
  }
  return r;
}

JuliaRender julia_point_cloud(const ParameterSequence& omega, std::size_t n, std::size_t sample_count,
                              std::uint64_t seed, std::size_t width, std::size_t height, unsigned threads) {
  JuliaRender out;
  out.cloud = backward_samples(default_basepoint(omega.radius_bound()), omega, n, sample_count, seed, threads);
  Bounds b = bounding_box(out.cloud.points);
  const double pad = 0.05 * std::max({b.re_max - b.re_min, b.im_max - b.im_min, 1e-3});
  b.re_min -= pad;
  b.re_max += pad;
  b.im_min -= pad;
  b.im_max += pad;
  out.raster = rasterize(out.cloud.points, width, height, b);
  return out;
}

void write_pgm(const Raster& raster, const std::string& path) {
  File f = open_for_write(path, "wb");
  std::fprintf(f.get(), "P5\n%zu %zu\n255\n", raster.width, raster.height);
  if (std::fwrite(raster.pixels.data(), 1, raster.pixels.size(), f.get()) != raster.pixels.size()) {
    throw Error(ErrorCode::IoError, "short write to '" + path + "'");
  }
}

void write_cloud_csv(const MeasurePointCloud& cloud, const std::string& path) {
  File f = open_for_write(path, "wb");
  std::fputs("re,im,weight\n", f.get());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    std::fprintf(f.get(), "%.17g,%.17g,%.17g\n", cloud.points[i].real(), cloud.points[i].imag(), cloud.weights[i]);
  }
  if (std::ferror(f.get())) throw Error(ErrorCode::IoError, "write error on '" + path + "'");
}

}  // namespace randquad
