#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "randquad/equilibrium_measure.hpp"
#include "randquad/random_systems.hpp"
#include "randquad/stats.hpp"

using namespace randquad;

namespace {

constexpr double kG4 = 0.750178391443644;

ParameterSequence constant(ComplexPoint c, std::size_t n) {
  return ParameterSequence(std::vector<ComplexPoint>(n, c), std::abs(c), "point");
}

std::vector<double> angles(const MeasurePointCloud& cloud) {
  std::vector<double> out;
  for (const auto z : cloud.points) out.push_back(std::arg(z) / (2 * std::numbers::pi) + 0.5);
  return out;
}

// Max distance from each of `a` to its nearest point of `b` (brute force).
double multiset_distance(std::vector<ComplexPoint> a, std::vector<ComplexPoint> b) {
  double worst = 0;
  for (const auto z : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](auto x, auto y) { return std::abs(x - z) < std::abs(y - z); });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}

}  // namespace

TEST_CASE("preimage_step examples") {
  const auto a = preimage_step({4, 0}, {0, 0});
  CHECK(a[0] == ComplexPoint(2, 0));
  CHECK(a[1] == ComplexPoint(-2, 0));
  const auto b = preimage_step({0.3, 0.2}, {0.3, 0.2});
  CHECK(b[0] == ComplexPoint(0, 0));
  CHECK(std::abs(b[1]) == 0.0);
  const auto c = preimage_step({0, 0}, {-1, 0});
  CHECK(c[0] == ComplexPoint(1, 0));
  CHECK(c[1] == ComplexPoint(-1, 0));
  const auto d = preimage_step({-3, 1}, {0.5, -2});
  CHECK(d[0].real() >= 0);
  CHECK(std::abs(d[0] * d[0] - ComplexPoint(-3.5, 3)) < 1e-14);
}

TEST_CASE("exact tree for c = 0") {
  const auto t1 = exact_preimage_tree({2, 0}, constant(0, 1), 1);
  REQUIRE(t1.size() == 2);
  CHECK(t1.points[0].real() == doctest::Approx(std::sqrt(2.0)));
  CHECK(t1.points[1].real() == doctest::Approx(-std::sqrt(2.0)));
  CHECK(t1.weights[0] == 0.5);
  for (std::size_t k = 0; k <= 12; ++k) {
    const auto t = exact_preimage_tree({2, 0}, constant(0, 12), k);
    REQUIRE(t.size() == (std::size_t{1} << k));
    const double expected = std::pow(2.0, std::ldexp(1.0, -static_cast<int>(k)));
    for (const auto z : t.points) REQUIRE(std::abs(z) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(stats::pairwise_sum(t.weights) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("exact tree composition order") {
  // f^2 = f_{c_1} o f_{c_0}. With omega = (0, 1) that is (z^2)^2 + 1 = 2, so z^4 = 1.
  const auto a = exact_preimage_tree({2, 0}, ParameterSequence::from_values({0, 1}), 2);
  CHECK(multiset_distance(a.points, {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) < 1e-12);
  // omega = (1, 0): (z^2 + 1)^2 = 2, z^2 = -1 +- sqrt(2).
  const auto b = exact_preimage_tree({2, 0}, ParameterSequence::from_values({1, 0}), 2);
  const double p = std::sqrt(std::sqrt(2.0) - 1), q = std::sqrt(std::sqrt(2.0) + 1);
  CHECK(multiset_distance(b.points, {{p, 0}, {-p, 0}, {0, q}, {0, -q}}) < 1e-12);
  // Branch order: "+" first at the top level.
  const auto top = preimage_step({2, 0}, 0);
  CHECK(std::abs(b.points[0] * b.points[0] + 1.0 - top[0]) < 1e-12);
  CHECK(std::abs(b.points[2] * b.points[2] + 1.0 - top[1]) < 1e-12);
}

TEST_CASE("exact tree limits") {
  CHECK_THROWS_AS(exact_preimage_tree({2, 0}, constant(0, 30), 23), Error);
  try {
    exact_preimage_tree({2, 0}, constant(0, 30), 5, 4);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TreeTooDeep);
  }
  CHECK_THROWS_AS(exact_preimage_tree({2, 0}, constant(0, 3), 4), Error);
}

TEST_CASE("tree atoms stay in the escape disc") {
  const ParameterLaw law = UniformDisc{{0, 0}, 2};
  const double R0 = escape_radius(2).R0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto omega = sample_prefix(law, {4, i}, 10);
    const auto z0 = std::polar(2 * R0 * (i + 1) / 20.0, 0.3 * i);
    const auto t = exact_preimage_tree(z0, omega, 10);
    for (const auto z : t.points) REQUIRE(std::abs(z) <= R0);
  }
}

TEST_CASE("backward samples for c = 0") {
  const auto omega = constant(0, 60);
  const auto cloud = backward_samples({2, 0}, omega, 30, 100000, 17, 1);
  CHECK(cloud.kind == CloudKind::BackwardSamples);
  for (const auto z : cloud.points) {
    REQUIRE(std::abs(z) >= 1.0);
    REQUIRE(std::abs(z) <= std::pow(2.0, std::ldexp(1.0, -30)) + 1e-15);
  }
  CHECK(stats::ks_uniform(angles(cloud)) < 1.628 / std::sqrt(1e5));

  // depth n against n + 5, and two basepoints.
  const auto deeper = backward_samples({2, 0}, omega, 35, 100000, 18, 1);
  CHECK(stats::ks_two_sample(angles(cloud), angles(deeper)) < 0.02);
  const auto other = backward_samples({3, 1}, omega, 30, 100000, 19, 1);
  CHECK(stats::ks_two_sample(angles(cloud), angles(other)) < 0.02);
}

TEST_CASE("backward sample at depth one") {
  const ParameterLaw law = UniformDisc{{0, 0}, 1};
  for (std::uint64_t i = 0; i < 64; ++i) {
    const auto omega = sample_prefix(law, {1, i}, 1);
    const auto pair = preimage_step({3, 0}, omega.at(0));
    const auto z = backward_orbit_sample({3, 0}, omega, 1, {2, i});
    CHECK((z == pair[0] || z == pair[1]));
  }
}

TEST_CASE("backward samples do not depend on thread count") {
  const auto omega = sample_prefix(UniformDisc{{0, 0}, 3}, {1, 1}, 40);
  const auto a = backward_samples({5, 0}, omega, 40, 5000, 3, 1);
  const auto b = backward_samples({5, 0}, omega, 40, 5000, 3, 7);
  CHECK(a.points == b.points);
}

TEST_CASE("pushforward identity") {
  for (std::size_t n = 0; n <= 10; ++n) {
    const auto r = pushforward_check(constant(0, 11), {2, 0}, n);
    CHECK(r.atoms == (std::size_t{2} << n));
    CHECK(r.discrepancy < 1e-10);
  }
  CHECK(pushforward_check(constant(0, 1), {2, 0}, 0).discrepancy < 1e-15);
  const ParameterLaw law = UniformDisc{{0, 0}, 1};
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto omega = sample_prefix(law, {31, i}, 9);
    CHECK(pushforward_check(omega, default_basepoint(1), 8).discrepancy < 1e-9);
  }
  CHECK_THROWS_AS(pushforward_check(constant(0, 30), {2, 0}, 22), Error);
}

TEST_CASE("pushforward detects a wrong tree") {
  // Matching f_{c_0}(tree(omega)) against tree(sigma omega) for a different
  // omega must fail by a visible margin.
  const auto omega = ParameterSequence::from_values({0, 0.5, 0.5});
  const auto wrong = ParameterSequence::from_values({0.3, 0.5, 0.5});
  const auto fine = exact_preimage_tree({3, 0}, omega, 3);
  const auto coarse = exact_preimage_tree({3, 0}, shift(wrong, 1), 2);
  std::vector<ComplexPoint> images, doubled;
  for (const auto y : fine.points) images.push_back(y * y + 0.3);
  for (const auto z : coarse.points) doubled.insert(doubled.end(), {z, z});
  CHECK(multiset_distance(images, doubled) > 0.1);
}

TEST_CASE("Lyapunov integral") {
  MeasurePointCloud one;
  one.points = {{1, 0}};
  one.weights = {1.0};
  CHECK(lyapunov_from_measure(one) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));

  const auto circle = exact_preimage_tree({2, 0}, constant(0, 22), 22);
  CHECK(std::abs(lyapunov_from_measure(circle) - std::numbers::ln2) < 1e-6);

  const auto c4 = exact_preimage_tree(default_basepoint(4), constant(4, 20), 16);
  const double chi16 = lyapunov_from_measure(c4);
  CHECK(std::abs(chi16 - (std::numbers::ln2 + kG4)) < 0.01);
  const auto c4b = exact_preimage_tree(default_basepoint(4), constant(4, 20), 20);
  CHECK(std::abs(lyapunov_from_measure(c4b) - chi16) < 0.01);

  MeasurePointCloud origin;
  origin.points = {{0, 0}, {1, 0}};
  origin.weights = {0.5, 0.5};
  try {
    lyapunov_from_measure(origin);
    FAIL("expected AtomAtOrigin");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AtomAtOrigin);
  }
}

TEST_CASE("local dimension: circle and c = 4") {
  const auto zero = constant(0, 40);
  const auto mass = backward_samples({2, 0}, zero, 30, 100000, 101, 1);
  const auto targets = backward_samples({2, 0}, zero, 30, 400, 202, 1);
  const auto fit = local_dimension_fit(mass.points, targets.points);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fit.radii.size() >= 4);
  CHECK(std::is_sorted(fit.radii.rbegin(), fit.radii.rend()));
  CHECK(std::adjacent_find(fit.radii.begin(), fit.radii.end()) == fit.radii.end());
  CHECK(fit.std_error >= 0);
  CHECK(fit.points_used > 300);

  const auto four = constant(4, 40);
  const auto m4 = backward_samples(default_basepoint(4), four, 40, 100000, 303, 1);
  const auto t4 = backward_samples(default_basepoint(4), four, 40, 400, 404, 1);
  const auto fit4 = local_dimension_fit(m4.points, t4.points);
  const double target = std::numbers::ln2 / (std::numbers::ln2 + kG4);
  CHECK(std::abs(fit4.slope - target) < 0.05);
}

TEST_CASE("local dimension preconditions") {
  std::vector<ComplexPoint> few(100, {1, 0});
  CHECK_THROWS_AS(local_dimension_fit(few, few), std::invalid_argument);
  // Counts of 50 are never reached with min_count above the sample size.
  const auto mass = backward_samples({2, 0}, constant(0, 20), 20, 10000, 1, 1);
  LocalDimensionOptions strict;
  strict.min_count = 20000;
  try {
    local_dimension_fit(mass.points, mass.points, strict);
    FAIL("expected InsufficientCounts");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientCounts);
  }
}

TEST_CASE("box counting") {
  const auto circle = backward_samples({2, 0}, constant(0, 30), 30, 100000, 5, 1);
  CHECK(box_counting_dimension(circle) == doctest::Approx(1.0).epsilon(0.05));

  const auto c4 = backward_samples(default_basepoint(4), constant(4, 40), 40, 100000, 6, 1);
  const auto fit = box_counting_fit(c4);
  CHECK(fit.dimension > std::numbers::ln2 / (std::numbers::ln2 + kG4));
  CHECK(std::is_sorted(fit.occupied.begin(), fit.occupied.end()));

  MeasurePointCloud single;
  single.points = {{0.5, 0.5}};
  single.weights = {1.0};
  try {
    box_counting_dimension(single);
    FAIL("expected DegenerateCloud");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateCloud);
  }
}

TEST_CASE("julia point cloud") {
  const auto zero = julia_point_cloud(constant(0, 30), 30, 20000, 1, 64, 48, 1);
  CHECK(zero.raster.width == 64);
  CHECK(zero.raster.height == 48);
  CHECK(zero.raster.pixels.size() == 64u * 48u);
  double lo = INFINITY, hi = 0;
  for (const auto z : zero.cloud.points) {
    lo = std::min(lo, std::abs(z));
    hi = std::max(hi, std::abs(z));
  }
  CHECK(hi - lo < 1e-6);
  CHECK(*std::max_element(zero.raster.pixels.begin(), zero.raster.pixels.end()) == 255);

  const ParameterSequence minus_two = sample_prefix(ExplicitList{{{-2, 0}}, ""}, {}, 30);
  const auto seg = julia_point_cloud(minus_two, 30, 20000, 2, 100, 20, 1);
  for (const auto z : seg.cloud.points) {
    const double to_segment = std::hypot(std::max(0.0, std::abs(z.real()) - 2.0), z.imag());
    REQUIRE(to_segment < 1e-3);
  }
}

TEST_CASE("cloud export") {
  const auto t = exact_preimage_tree({2, 0}, constant(0, 2), 2);
  const std::string csv = "test_equilibrium_cloud.csv", pgm = "test_equilibrium_raster.pgm";
  write_cloud_csv(t, csv);
  std::ifstream in(csv, std::ios::binary);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "re,im,weight");
  std::size_t rows = 0;
  while (std::getline(in, row)) {
    CHECK(row.find('\r') == std::string::npos);
    ++rows;
  }
  CHECK(rows == 4);
  const Raster r = rasterize(t.points, 8, 4, {-2, 2, -2, 2});
  write_pgm(r, pgm);
  std::ifstream img(pgm, std::ios::binary | std::ios::ate);
  CHECK(static_cast<std::size_t>(img.tellg()) == std::string("P5\n8 4\n255\n").size() + 32);
  std::remove(csv.c_str());
  std::remove(pgm.c_str());
  CHECK_THROWS_AS(write_pgm(r, "/nonexistent/dir/x.pgm"), Error);
}
