#include "randquad/core_dynamics.hpp"

#include <algorithm>
#include <stdexcept>

namespace randquad {

EscapeRadius escape_radius(double R) {
  if (!(R >= 0.0) || !std::isfinite(R)) {
    throw std::invalid_argument("escape_radius: R must be finite and non-negative");
  }
  return EscapeRadius{R, 1.0 + std::sqrt(1.0 + 2.0 * R)};
}

ParameterSequence::ParameterSequence(std::vector<ComplexPoint> prefix, double radius_bound, std::string law_tag,
                                     SeedSpec seed, std::size_t offset)
    : prefix_(std::move(prefix)),
      radius_bound_(radius_bound),
      law_tag_(std::move(law_tag)),
      seed_(seed),
      offset_(offset) {
  if (!(radius_bound_ >= 0.0) || !std::isfinite(radius_bound_)) {
    throw std::invalid_argument("ParameterSequence: radius bound must be finite and non-negative");
  }
  // One part in 1e12 of slack absorbs rounding in the disc samplers.
  const double limit = radius_bound_ * (1.0 + 1e-12);
  for (const ComplexPoint& c : prefix_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()) || std::abs(c) > limit) {
      throw std::invalid_argument("ParameterSequence: parameter outside D(0, R)");
    }
  }
}

ParameterSequence ParameterSequence::from_values(std::vector<ComplexPoint> prefix) {
  double r = 0.0;
  for (const ComplexPoint& c : prefix) r = std::max(r, std::abs(c));
  return ParameterSequence(std::move(prefix), r);
}

ComplexPoint ParameterSequence::at(std::size_t k) const {
  if (k >= prefix_.size()) {
    throw Error(ErrorCode::PrefixTooShort,
                "parameter " + std::to_string(k) + " requested from a prefix of length " +
                    std::to_string(prefix_.size()));
  }
  return prefix_[k];
}

OrbitState orbit_step(const OrbitState& s, ComplexPoint c) noexcept {
  if (!s.log_domain) {
    const ComplexPoint next = s.z * s.z + c;
    const double modulus = std::abs(next);
    if (modulus > kOverflowModulus) return OrbitState{next / modulus, std::log(modulus), true};
    return OrbitState{next, 0.0, false};
  }
  // z = e^L u  =>  z^2 + c = e^{2L} (u^2 + c e^{-2L}).
  ComplexPoint w = s.z * s.z;
  const double damp = std::exp(-2.0 * s.log_abs);
  if (std::abs(c) * damp >= kCorrectionFloor) w += c * damp;
  const double modulus = std::abs(w);
  return OrbitState{w / modulus, 2.0 * s.log_abs + std::log(modulus), true};
}

OrbitState iterate_orbit(ComplexPoint z, const ParameterSequence& omega, std::size_t n) {
  if (n > omega.size()) {
    throw Error(ErrorCode::PrefixTooShort, "iterate_orbit: " + std::to_string(n) + " steps requested from " +
                                               std::to_string(omega.size()) + " parameters");
  }
  OrbitState s = OrbitState::from(z);
  for (std::size_t k = 0; k < n; ++k) s = orbit_step(s, omega.at(k));
  return s;
}

namespace detail {
void validate(const GreenOptions& options) {
  // Below ~2^-1000 the post-escape depth would overflow ln|f^k|.
  if (!(options.tol > 1e-250) || !std::isfinite(options.tol)) {
    throw std::invalid_argument("green_point: tol must lie in (1e-250, inf)");
  }
  if (options.depth_cap < 1) throw std::invalid_argument("green_point: depth_cap must be >= 1");
}
}  // namespace detail

}  // namespace randquad
