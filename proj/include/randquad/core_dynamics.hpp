#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "randquad/error.hpp"
#include "randquad/rng.hpp"

// Non-autonomous iteration of f_c(z) = z^2 + c along a parameter sequence
// omega = (c_0, c_1, ...), with f^n = f_{c_{n-1}} o ... o f_{c_0}, and the
// certified evaluation of the Green's function g(z) = lim 2^-n ln|f^n(z)|.

namespace randquad {

using ComplexPoint = std::complex<double>;

inline constexpr double kOverflowModulus = 1e100;
inline constexpr double kCorrectionFloor = 1e-18;
inline constexpr double kDefaultTolerance = 1e-9;
inline constexpr std::size_t kDefaultDepthCap = 1000;

struct EscapeRadius {
  double R = 0.0;   // bound on |c|
  double R0 = 2.0;  // |z| >= R0 implies |z^2 + c| >= 2|z| for every |c| <= R
};

// R0 = 1 + sqrt(1 + 2R). It gives |z|^2 - R >= 2|z| and R / R0^2 <= 1/2, and
// the latter bounds the telescoping tail so that |g(z) - ln|z|| < 0.39 outside
// D(0, R0).
EscapeRadius escape_radius(double R);

// A finite prefix of omega together with what is needed to regenerate it.
class ParameterSequence {
 public:
  ParameterSequence() = default;
  // Throws std::invalid_argument if some |c_k| exceeds radius_bound.
  ParameterSequence(std::vector<ComplexPoint> prefix, double radius_bound, std::string law_tag = "explicit",
                    SeedSpec seed = {}, std::size_t offset = 0);

  // Radius bound taken as the largest |c_k|.
  static ParameterSequence from_values(std::vector<ComplexPoint> prefix);

  std::size_t size() const noexcept { return prefix_.size(); }
  ComplexPoint at(std::size_t k) const;  // PrefixTooShort past the end
  std::span<const ComplexPoint> prefix() const noexcept { return prefix_; }
  double radius_bound() const noexcept { return radius_bound_; }
  const std::string& law_tag() const noexcept { return law_tag_; }
  SeedSpec seed() const noexcept { return seed_; }
  // Position of prefix()[0] in the generating stream (non-zero after a shift).
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::vector<ComplexPoint> prefix_;
  double radius_bound_ = 0.0;
  std::string law_tag_ = "explicit";
  SeedSpec seed_{};
  std::size_t offset_ = 0;
};

// Anything that can hand out c_k on demand and bounds every |c_k|.
template <class S>
concept ParameterSource = requires(const S& s, std::size_t k) {
  { s.at(k) } -> std::convertible_to<ComplexPoint>;
  { s.radius_bound() } -> std::convertible_to<double>;
};

// View of sigma^k(omega).
template <ParameterSource S>
class Shifted {
 public:
  Shifted(const S& base, std::size_t k) : base_(&base), k_(k) {}
  ComplexPoint at(std::size_t i) const { return base_->at(i + k_); }
  double radius_bound() const { return base_->radius_bound(); }

 private:
  const S* base_;
  std::size_t k_;
};

// One iterate. Below kOverflowModulus `z` is the iterate itself; above it the
// state holds the unit phase in `z` and ln|f^k| in `log_abs`.
struct OrbitState {
  ComplexPoint z{};
  double log_abs = 0.0;  // meaningful only when log_domain
  bool log_domain = false;

  static OrbitState from(ComplexPoint z0) noexcept { return OrbitState{z0, 0.0, false}; }

  double log_modulus() const noexcept { return log_domain ? log_abs : std::log(std::abs(z)); }
  // The iterate as a complex number; overflows to infinity in the log domain.
  ComplexPoint value() const noexcept { return log_domain ? z * std::exp(log_abs) : z; }
};

OrbitState orbit_step(const OrbitState& state, ComplexPoint c) noexcept;

// f^n_omega(z). PrefixTooShort if n exceeds the available parameters.
OrbitState iterate_orbit(ComplexPoint z, const ParameterSequence& omega, std::size_t n);

struct GreenOptions {
  double tol = kDefaultTolerance;
  std::size_t depth_cap = kDefaultDepthCap;
};

inline constexpr std::size_t kNoEscape = std::numeric_limits<std::size_t>::max();

struct GreenEstimate {
  double value = 0.0;        // nats
  double error_bound = 0.0;  // |g - value| <= error_bound
  std::size_t escape_depth = 0;
  bool escaped = false;
  double log_abs_iterate = 0.0;  // ln|f^k(z)| at the stopping depth
  std::size_t first_escape = kNoEscape;  // first k with |f^k(z)| > R0
};

namespace detail {
void validate(const GreenOptions& options);
}

// Stops at the first k with |f^k(z)| > R0 and 2^-k <= tol and returns
// 2^-k ln|f^k(z)|, which is within 2^-k of g(z). An orbit that stays in
// D(0, R0) through depth_cap reports value 0 with bound 2^-cap (ln R0 + 1).
template <ParameterSource S>
GreenEstimate green_point(ComplexPoint z, const S& omega, const GreenOptions& options = {}) {
  detail::validate(options);
  const EscapeRadius er = escape_radius(omega.radius_bound());
  const double r0_sq = er.R0 * er.R0;
  const double log_r0 = std::log(er.R0);

  OrbitState s = OrbitState::from(z);
  std::size_t first_escape = kNoEscape;
  for (std::size_t k = 0;; ++k) {
    const bool outside = s.log_domain ? s.log_abs > log_r0 : std::norm(s.z) > r0_sq;
    if (outside) {
      if (first_escape == kNoEscape) first_escape = k;
      const double scale = std::ldexp(1.0, -static_cast<int>(k));
      if (scale <= options.tol) {
        const double log_abs = s.log_modulus();
        return GreenEstimate{std::ldexp(log_abs, -static_cast<int>(k)), scale, k, true, log_abs, first_escape};
      }
    } else if (k >= options.depth_cap) {
      return GreenEstimate{0.0, std::ldexp(log_r0 + 1.0, -static_cast<int>(k)), k, false, s.log_modulus(),
                           kNoEscape};
    }
    s = orbit_step(s, omega.at(k));
  }
}

struct FunctionalEquationCheck {
  double residual = 0.0;  // |g_{sigma omega}(f_omega(z)) - 2 g_omega(z)|
  double bound = 0.0;     // 3 * (sum of the two certified error bounds)
  GreenEstimate at_point;
  GreenEstimate at_image;
};

// NonEscaping if either evaluation fails to escape within the depth cap.
template <ParameterSource S>
FunctionalEquationCheck green_functional_equation_residual(ComplexPoint z, const S& omega,
                                                           const GreenOptions& options = {}) {
  FunctionalEquationCheck out;
  out.at_point = green_point(z, omega, options);
  const ComplexPoint image = z * z + omega.at(0);
  out.at_image = green_point(image, Shifted<S>(omega, 1), options);
  if (!out.at_point.escaped || !out.at_image.escaped) {
    throw Error(ErrorCode::NonEscaping, "functional equation needs an escaping point");
  }
  out.residual = std::abs(out.at_image.value - 2.0 * out.at_point.value);
  out.bound = 3.0 * (out.at_point.error_bound + out.at_image.error_bound);
  return out;
}

}  // namespace randquad
