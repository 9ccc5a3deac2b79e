#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "randquad/random_systems.hpp"
#include "randquad/stats.hpp"

using namespace randquad;

TEST_CASE("radius bound per variant") {
  CHECK(ParameterLaw(UniformDisc{{3, 4}, 2}).radius_bound() == doctest::Approx(7));
  CHECK(ParameterLaw(Perturbation{{1, 0}, {0, 0.5}}).radius_bound() == doctest::Approx(1.5));
  CHECK(ParameterLaw(PointMass{{0, -2}}).radius_bound() == doctest::Approx(2));
  CHECK(ParameterLaw(ExplicitList{{{1, 0}, {0, 3}}, ""}).radius_bound() == doctest::Approx(3));
  CHECK_THROWS_AS(ParameterLaw(ExplicitList{{}, ""}), std::invalid_argument);
  CHECK_THROWS_AS(ParameterLaw(UniformDisc{{0, 0}, -1}), std::invalid_argument);
}

TEST_CASE("degenerate laws") {
  const auto zeros = sample_prefix(PointMass{{0, 0}}, {123, 4}, 5);
  REQUIRE(zeros.size() == 5);
  for (const auto c : zeros.prefix()) CHECK(c == ComplexPoint(0, 0));

  const auto ones = sample_prefix(Perturbation{{1, 0}, {0, 0}}, {9, 9}, 3);
  for (const auto c : ones.prefix()) CHECK(c == ComplexPoint(1, 0));

  const auto cyc = sample_prefix(ExplicitList{{{1, 0}, {2, 0}, {3, 0}}, ""}, {}, 7);
  CHECK(cyc.at(0) == ComplexPoint(1, 0));
  CHECK(cyc.at(3) == ComplexPoint(1, 0));
  CHECK(cyc.at(5) == ComplexPoint(3, 0));
  CHECK_THROWS_AS(sample_prefix(PointMass{}, {}, 0), std::invalid_argument);
}

TEST_CASE("reproducibility and stream separation") {
  const ParameterLaw law = UniformDisc{{0.5, -0.25}, 2};
  const auto a = sample_prefix(law, {77, 3}, 64);
  const auto b = sample_prefix(law, {77, 3}, 64);
  const auto c = sample_prefix(law, {77, 4}, 64);
  CHECK(std::equal(a.prefix().begin(), a.prefix().end(), b.prefix().begin()));
  CHECK_FALSE(std::equal(a.prefix().begin(), a.prefix().end(), c.prefix().begin()));
  CHECK(a.law_tag() == law.tag());
  CHECK(a.seed() == SeedSpec{77, 3});
  // Regeneration from the recorded tag and seed.
  const auto again = sample_prefix(parse_law(a.law_tag()), a.seed(), 64);
  CHECK(std::equal(a.prefix().begin(), a.prefix().end(), again.prefix().begin()));
  // The lazy stream agrees with the materialized prefix.
  const ParameterStream s(law, {77, 3});
  for (std::size_t k = 0; k < 64; ++k) CHECK(s.at(k) == a.at(k));
}

TEST_CASE("support bound per draw") {
  for (const ParameterLaw law : {ParameterLaw(UniformDisc{{1, 1}, 3}), ParameterLaw(Perturbation{{1, 0}, {0.03, 0.04}})}) {
    for (std::uint64_t i = 0; i < 200; ++i) {
      const auto omega = sample_prefix(law, {1, i}, 50);
      for (const auto c : omega.prefix()) REQUIRE(std::abs(c) <= law.radius_bound() * (1 + 1e-12));
    }
  }
}

TEST_CASE("uniform disc second moment over 1e6 draws") {
  const double R = 3.0;
  const ParameterLaw law = UniformDisc{{0, 0}, R};
  const ParameterStream s(law, {2024, 0});
  std::vector<double> m(1000000);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::norm(s.at(k));
  const auto ms = stats::summarize(m);
  CHECK(std::abs(ms.mean - R * R / 2) <= 3 * ms.std_error);
}

TEST_CASE("uniform disc radial law is uniform (KS)") {
  const double R = 2.5;
  const ParameterLaw law = UniformDisc{{0, 0}, R};
  std::vector<double> u;
  for (std::uint64_t i = 0; i < 100000; ++i) u.push_back(std::norm(ParameterStream(law, {5, i}).at(0)) / (R * R));
  // 1% critical value 1.628 / sqrt(n).
  CHECK(stats::ks_uniform(u) < 1.628 / std::sqrt(1e5));
}

TEST_CASE("rotation keeps the law of v") {
  const ParameterLaw law = Perturbation{{0, 0}, {1, 0}};
  const ParameterLaw rotated = rotate_law(law, {0, 1});
  std::vector<double> re_a, re_b, im_a, im_b;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const ComplexPoint a = ParameterStream(law, {8, i}).at(0);
    const ComplexPoint b = ParameterStream(rotated, {9, i}).at(0);
    re_a.push_back(a.real());
    im_a.push_back(a.imag());
    re_b.push_back(b.real());
    im_b.push_back(b.imag());
  }
  for (auto* pair : {&re_a, &im_a, &re_b, &im_b}) {
    const auto s = stats::summarize(*pair);
    CHECK(std::abs(s.mean) < 4 * s.std_error);
    CHECK(s.std_dev * s.std_dev == doctest::Approx(0.25).epsilon(0.02));
  }
  CHECK(stats::ks_two_sample(re_a, re_b) < 1.95 * std::sqrt(2.0 / 1e5));
}

TEST_CASE("rotate_law examples") {
  const ParameterLaw law = Perturbation{{1, 0}, {0.05, 0}};
  const auto& r = std::get<Perturbation>(rotate_law(law, {0, 1}).variant());
  CHECK(std::abs(r.lambda - ComplexPoint(0, 0.05)) < 1e-17);
  const auto& id = std::get<Perturbation>(rotate_law(law, {1, 0}).variant());
  CHECK(id.lambda == ComplexPoint(0.05, 0));
  const auto& any = std::get<Perturbation>(rotate_law(law, std::polar(1.0, 0.7)).variant());
  CHECK(std::abs(any.lambda) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK_THROWS_AS(rotate_law(UniformDisc{{0, 0}, 1}, {0, 1}), Error);
  CHECK_THROWS_AS(rotate_law(law, {2, 0}), std::invalid_argument);
  try {
    rotate_law(PointMass{}, {1, 0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPerturbation);
  }
}

TEST_CASE("shift") {
  const auto omega = ParameterSequence::from_values({{1, 0}, {2, 0}, {3, 0}});
  const auto one = shift(omega, 1);
  CHECK(one.size() == 2);
  CHECK(one.at(0) == ComplexPoint(2, 0));
  CHECK(one.offset() == 1);
  const auto zero = shift(omega, 0);
  CHECK(std::equal(zero.prefix().begin(), zero.prefix().end(), omega.prefix().begin()));
  const auto a = shift(shift(omega, 1), 2), b = shift(omega, 3);
  CHECK(a.size() == b.size());
  CHECK(a.offset() == b.offset());
  CHECK_THROWS_AS(shift(omega, 4), Error);

  const auto sampled = sample_prefix(UniformDisc{{0, 0}, 1}, {3, 1}, 10);
  const auto shifted = shift(sampled, 4);
  CHECK(shifted.law_tag() == sampled.law_tag());
  CHECK(shifted.seed() == sampled.seed());
  CHECK(shifted.at(0) == sampled.at(4));
}

TEST_CASE("stratified stream") {
  const ParameterLaw law = UniformDisc{{0, 0}, 4};
  const std::size_t n = 100;
  std::vector<double> u;
  for (std::size_t i = 0; i < n; ++i) {
    const StratifiedStream s(law, {1, i}, i, n);
    const double v = std::norm(s.at(0)) / 16.0;
    CHECK(v >= static_cast<double>(i) / n);
    CHECK(v < static_cast<double>(i + 1) / n + 1e-15);
    CHECK(s.at(3) == ParameterStream(law, {1, i}).at(3));
  }
  CHECK_THROWS_AS(StratifiedStream(law, {}, 5, 5), std::invalid_argument);
}

TEST_CASE("law grammar") {
  const auto u = std::get<UniformDisc>(parse_law("uniform(0,0,4)").variant());
  CHECK(u.radius == 4);
  const auto p = std::get<Perturbation>(parse_law(" perturb( 1, 0, 0.05, 0 ) ").variant());
  CHECK(p.c0 == ComplexPoint(1, 0));
  CHECK(p.lambda == ComplexPoint(0.05, 0));
  CHECK(std::get<PointMass>(parse_law("point(-2,0)").variant()).c == ComplexPoint(-2, 0));
  for (const char* bad : {"uniform(0,0)", "uniform(0,0,-1)", "gauss(0,1)", "point(a,b)", "uniform 0,0,1", "point(1,2,3)",
                          "", "list()"}) {
    CHECK_THROWS_AS(parse_law(bad), Error);
  }
  try {
    parse_law("uniform(0,zero,1)");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
  for (const char* spec : {"uniform(0.5,-0.25,3)", "perturb(1,0,0.029999999999999999,0)", "point(4,0)"}) {
    CHECK(parse_law(parse_law(spec).tag()).tag() == parse_law(spec).tag());
  }
  const ParameterLaw inline_list = ExplicitList{{{1, 0.5}, {-2, 0}}, ""};
  const auto back = std::get<ExplicitList>(parse_law(inline_list.tag()).variant());
  CHECK(back.values.size() == 2);
  CHECK(back.values[0] == ComplexPoint(1, 0.5));
}

TEST_CASE("list files") {
  const std::string path = "test_random_systems_list.csv";
  {
    std::ofstream out(path);
    out << "re,im\n-2,0\n0.25,0.5\n";
  }
  const ParameterLaw law = parse_law("list(" + path + ")");
  const auto& l = std::get<ExplicitList>(law.variant());
  REQUIRE(l.values.size() == 2);
  CHECK(l.values[1] == ComplexPoint(0.25, 0.5));
  CHECK(law.tag() == "list(" + path + ")");
  std::remove(path.c_str());
  try {
    parse_law("list(/nonexistent/file.csv)");
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
