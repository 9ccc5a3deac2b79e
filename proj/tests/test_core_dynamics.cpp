#include <cmath>
#include <numbers>

#include "doctest.h"
#include "randquad/core_dynamics.hpp"
#include "randquad/random_systems.hpp"

using namespace randquad;

namespace {

// Constant-c source without a stored prefix.
struct Constant {
  ComplexPoint c;
  ComplexPoint at(std::size_t) const { return c; }
  double radius_bound() const { return std::abs(c); }
};

// (first, rest, rest, ...)
struct HeadThen {
  ComplexPoint head, rest;
  ComplexPoint at(std::size_t k) const { return k == 0 ? head : rest; }
  double radius_bound() const { return std::max(std::abs(head), std::abs(rest)); }
};

// Autonomous values from a 60-level mpmath iteration.
constexpr double kG4 = 0.750178391443644;
constexpr double kG1 = 0.203677261369740;

}  // namespace

TEST_CASE("escape radius closed forms") {
  CHECK(escape_radius(0.0).R0 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(escape_radius(4.0).R0 == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(escape_radius(112.0).R0 == doctest::Approx(16.0).epsilon(1e-15));
  CHECK_THROWS_AS(escape_radius(-1.0), std::invalid_argument);
}

TEST_CASE("escape radius doubling on a dense boundary grid") {
  for (const double R : {0.0, 0.25, 1.0, 4.0, 112.0, 1e6}) {
    const double R0 = escape_radius(R).R0;
    CHECK(R0 >= 2.0);
    CHECK(R / (R0 * R0) <= 0.5);
    double worst = INFINITY;
    for (int i = 0; i < 360; ++i) {
      const ComplexPoint z = std::polar(R0, 2 * std::numbers::pi * i / 360);
      for (int j = 0; j < 360; ++j) {
        const ComplexPoint c = std::polar(R, 2 * std::numbers::pi * j / 360);
        worst = std::min(worst, std::abs(z * z + c) - 2 * std::abs(z));
      }
    }
    CHECK(worst >= -1e-9 * R0 * R0);
  }
}

TEST_CASE("escape radius doubling on random pairs") {
  const ParameterLaw law = UniformDisc{{0, 0}, 1.0};
  for (const double R : {0.3, 3.0, 30.0}) {
    const double R0 = escape_radius(R).R0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
      const ParameterStream s(law, {11, i});
      const ComplexPoint z = std::polar(R0, 2 * std::numbers::pi * std::arg(s.at(0)));
      const ComplexPoint c = R * s.at(1);
      REQUIRE(std::abs(z * z + c) >= 2 * std::abs(z) * (1 - 1e-12));
    }
  }
}

TEST_CASE("iterate_orbit examples") {
  CHECK(iterate_orbit({1, 0}, ParameterSequence::from_values({0, 0, 0}), 3).value() == ComplexPoint(1, 0));
  CHECK(iterate_orbit({0, 0}, ParameterSequence::from_values({4, 4}), 2).value() == ComplexPoint(20, 0));
  // 0 -> -1 -> 0 -> -1 -> 0.
  CHECK(iterate_orbit({0, 0}, ParameterSequence::from_values({-1, -1, -1, -1}), 4).value() == ComplexPoint(0, 0));
  CHECK(iterate_orbit({0, 0}, ParameterSequence::from_values({-1, -1, -1}), 3).value() == ComplexPoint(-1, 0));
  CHECK(iterate_orbit({3, 0}, ParameterSequence::from_values({1}), 0).value() == ComplexPoint(3, 0));
  CHECK_THROWS_AS(iterate_orbit({0, 0}, ParameterSequence::from_values({1, 1}), 3), Error);
  try {
    iterate_orbit({0, 0}, ParameterSequence::from_values({1}), 2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PrefixTooShort);
  }
}

TEST_CASE("log-domain continuation") {
  const auto omega = ParameterSequence::from_values(std::vector<ComplexPoint>(40, ComplexPoint(0, 0)));
  const OrbitState s = iterate_orbit({3, 0}, omega, 40);
  CHECK(s.log_domain);
  CHECK(std::isfinite(s.log_abs));
  CHECK(s.log_abs == doctest::Approx(std::ldexp(std::log(3.0), 40)).epsilon(1e-13));
  CHECK(std::abs(s.z) == doctest::Approx(1.0).epsilon(1e-14));
  // The phase survives the switch: z = 3i squares to a negative real first.
  const OrbitState p = iterate_orbit({0, 3}, omega, 10);
  CHECK(p.log_domain);
  CHECK(std::abs(p.z - ComplexPoint(1, 0)) < 1e-9);  // (3i)^1024 is positive
}

TEST_CASE("green_point closed forms") {
  const Constant zero{{0, 0}};
  const GreenEstimate e2 = green_point({2, 0}, zero, {1e-6, 1000});
  CHECK(e2.escaped);
  CHECK(std::abs(e2.value - std::numbers::ln2) <= e2.error_bound);
  CHECK(e2.error_bound <= 1e-6);

  const GreenEstimate inside = green_point({0.5, 0}, zero);
  CHECK_FALSE(inside.escaped);
  CHECK(inside.value == 0.0);
  CHECK(inside.first_escape == kNoEscape);

  const HeadThen four_then_zero{{4, 0}, {0, 0}};
  const GreenEstimate e4 = green_point({0, 0}, four_then_zero);
  CHECK(e4.escaped);
  CHECK(std::abs(e4.value - std::numbers::ln2) <= 1e-9);

  const GreenEstimate g4 = green_point({0, 0}, Constant{{4, 0}});
  CHECK(std::abs(g4.value - kG4) <= g4.error_bound + 1e-14);
  const GreenEstimate g1 = green_point({0, 0}, Constant{{1, 0}});
  CHECK(std::abs(g1.value - kG1) <= g1.error_bound + 1e-14);
}

TEST_CASE("green_point certified error for c = 0") {
  const Constant zero{{0, 0}};
  for (const double tol : {1e-3, 1e-6, 1e-12}) {
    for (const ComplexPoint z : {ComplexPoint(1.01, 0), ComplexPoint(0, 1.5), ComplexPoint(-7, 3), ComplexPoint(9, 9)}) {
      const GreenEstimate e = green_point(z, zero, {tol, 1000});
      REQUIRE(e.escaped);
      CHECK(e.error_bound <= tol);
      CHECK(e.error_bound <= std::ldexp(1.0, -static_cast<int>(e.escape_depth)));
      CHECK(std::abs(e.value - std::log(std::abs(z))) <= e.error_bound);
    }
  }
}

TEST_CASE("green_point option validation") {
  const Constant zero{{0, 0}};
  CHECK_THROWS_AS(green_point({2, 0}, zero, {0.0, 10}), std::invalid_argument);
  CHECK_THROWS_AS(green_point({2, 0}, zero, {1e-6, 0}), std::invalid_argument);
}

TEST_CASE("non-escape bound against depth cap") {
  const GreenEstimate e = green_point({0, 0}, Constant{{-1, 0}}, {1e-9, 64});
  CHECK_FALSE(e.escaped);
  CHECK(e.value == 0.0);
  CHECK(e.escape_depth == 64);
  CHECK(e.error_bound == doctest::Approx(std::ldexp(std::log(2.0) + 1.0, -64)));
}

TEST_CASE("one-nat bound and monotone doubling on random systems") {
  const ParameterLaw law = UniformDisc{{0, 0}, 3.0};
  const double R0 = escape_radius(3.0).R0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const ParameterStream omega(law, {5, i});
    const ParameterStream zs(law, {6, i});
    const ComplexPoint z = (R0 * (1.0 + 1e-9)) * std::polar(1.0 + 3.0 * std::abs(zs.at(0)), std::arg(zs.at(1)));
    const GreenEstimate e = green_point(z, omega);
    REQUIRE(e.escaped);
    CHECK(e.first_escape == 0);
    CHECK(std::abs(e.value - std::log(std::abs(z))) < 1.0);
    OrbitState s = OrbitState::from(z);
    for (std::size_t k = 0; k < 12; ++k) {
      const OrbitState next = orbit_step(s, omega.at(k));
      REQUIRE(next.log_modulus() >= s.log_modulus() + std::log(2.0) - 1e-12);
      s = next;
    }
  }
}

TEST_CASE("functional equation residual") {
  const Constant zero{{0, 0}};
  const FunctionalEquationCheck a = green_functional_equation_residual({2, 0}, zero, {1e-6, 1000});
  CHECK(a.residual <= 3e-6);
  CHECK(a.residual <= a.bound);

  const HeadThen four_then_zero{{4, 0}, {0, 0}};
  const FunctionalEquationCheck b = green_functional_equation_residual({0, 0}, four_then_zero);
  CHECK(std::abs(b.at_image.value - std::log(4.0)) <= b.at_image.error_bound);
  CHECK(b.residual <= b.bound);

  const ParameterLaw law = UniformDisc{{0, 0}, 1.0};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ParameterStream omega(law, {seed, 0});
    const FunctionalEquationCheck c = green_functional_equation_residual({3, 0}, omega);
    CHECK(c.residual <= c.bound);
  }

  CHECK_THROWS_AS(green_functional_equation_residual({0.5, 0}, zero), Error);
}

TEST_CASE("green_point is deterministic") {
  const ParameterLaw law = UniformDisc{{0, 0}, 2.0};
  const ParameterStream a(law, {42, 7}), b(law, {42, 7});
  const GreenEstimate x = green_point({0, 0}, a), y = green_point({0, 0}, b);
  CHECK(x.value == y.value);
  CHECK(x.escape_depth == y.escape_depth);
  CHECK(x.log_abs_iterate == y.log_abs_iterate);
}

TEST_CASE("sequence validation") {
  CHECK_THROWS_AS(ParameterSequence({{2, 0}}, 1.0), std::invalid_argument);
  CHECK_NOTHROW(ParameterSequence({{1, 0}}, 1.0));
  CHECK_THROWS_AS(ParameterSequence::from_values({1}).at(1), Error);
}
