#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "randquad/core_dynamics.hpp"
#include "randquad/rng.hpp"

namespace randquad {

struct UniformDisc {
  ComplexPoint center{};
  double radius = 0.0;
};

// c = c0 + lambda * v with v uniform on the closed unit disc.
struct Perturbation {
  ComplexPoint c0{};
  ComplexPoint lambda{};
};

struct PointMass {
  ComplexPoint c{};
};

// Deterministic, cycled: c_k = values[k mod size].
struct ExplicitList {
  std::vector<ComplexPoint> values;
  std::string source;  // file the values were read from, if any
};

// Distribution of a single parameter; sequences are i.i.d. products of it.
class ParameterLaw {
 public:
  using Variant = std::variant<UniformDisc, Perturbation, PointMass, ExplicitList>;

  ParameterLaw() : variant_(PointMass{}) {}
  ParameterLaw(UniformDisc law);
  ParameterLaw(Perturbation law);
  ParameterLaw(PointMass law);
  ParameterLaw(ExplicitList law);

  const Variant& variant() const noexcept { return variant_; }
  // Smallest R with support inside the closed disc D(0, R).
  double radius_bound() const noexcept { return radius_bound_; }
  // Canonical spec string, e.g. "uniform(0,0,4)"; parse_law() inverts it.
  std::string tag() const;

  // Parameter number k of the stream produced by the two uniforms (u1, u2).
  ComplexPoint draw(std::size_t k, double u1, double u2) const;

 private:
  Variant variant_;
  double radius_bound_ = 0.0;
};

// Point sqrt(u1) * exp(2 pi i u2): exactly area-uniform on the closed unit
// disc, two uniforms per draw, no rejection.
ComplexPoint unit_disc_point(double u1, double u2) noexcept;

// Lazy omega: c_k is a pure function of (law, seed, k). A view; the law must
// outlive the stream.
class ParameterStream {
 public:
  ParameterStream(const ParameterLaw& law, SeedSpec seed) : law_(&law), seed_(seed), key_(seed.subseed()) {}

  ComplexPoint at(std::size_t k) const {
    return law_->draw(k, to_unit(counter_bits(key_, 2 * k)), to_unit(counter_bits(key_, 2 * k + 1)));
  }
  double radius_bound() const noexcept { return law_->radius_bound(); }
  const ParameterLaw& law() const noexcept { return *law_; }
  SeedSpec seed() const noexcept { return seed_; }

 private:
  const ParameterLaw* law_;
  SeedSpec seed_;
  std::uint64_t key_;
};

// Stream whose first parameter is stratified: c_0 uses u1 = (stratum + u) /
// strata, so n samples with strata 0..n-1 cover the first draw evenly. All
// later parameters are i.i.d. as in ParameterStream.
class StratifiedStream {
 public:
  StratifiedStream(const ParameterLaw& law, SeedSpec seed, std::size_t stratum, std::size_t strata);

  ComplexPoint at(std::size_t k) const;
  double radius_bound() const noexcept { return base_.radius_bound(); }

 private:
  ParameterStream base_;
  ComplexPoint first_;
};

ParameterSequence sample_prefix(const ParameterLaw& law, SeedSpec seed, std::size_t n);

// Materializes the first n parameters of any source.
template <ParameterSource S>
ParameterSequence materialize(const S& source, std::size_t n, std::string tag = "explicit", SeedSpec seed = {}) {
  std::vector<ComplexPoint> prefix(n);
  for (std::size_t k = 0; k < n; ++k) prefix[k] = source.at(k);
  return ParameterSequence(std::move(prefix), source.radius_bound(), std::move(tag), seed);
}

// sigma^k(omega). PrefixTooShort if k exceeds the prefix length.
ParameterSequence shift(const ParameterSequence& omega, std::size_t k);

// Perturbation with lambda replaced by eta * lambda. NotPerturbation for any
// other variant; |eta| must be 1.
ParameterLaw rotate_law(const ParameterLaw& law, ComplexPoint eta);

// Grammar: uniform(cx,cy,r) | perturb(c0x,c0y,lx,ly) | point(cx,cy) |
// list(file.csv). Throws Error(ConfigError) on malformed input and
// Error(IoError) if a list file cannot be read.
ParameterLaw parse_law(std::string_view spec);

// "re,im" rows; a first line that does not parse as numbers is a header.
std::vector<ComplexPoint> read_parameter_csv(const std::string& path);

}  // namespace randquad
