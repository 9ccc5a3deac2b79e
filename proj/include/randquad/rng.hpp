#pragma once

#include <cstdint>

// Counter-based random bits. Every draw is addressed by (key, counter), so a
// stream can be evaluated at any index without carrying generator state. This
// is what makes parallel sampling order-independent.

namespace randquad {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Steele, Lea, Flood 2014). A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Output number `counter` of the SplitMix64 sequence seeded with `key`.
constexpr std::uint64_t counter_bits(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(key + (counter + 1) * kGoldenGamma);
}

// 53 random mantissa bits mapped to [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Separates independent purposes (mass samples, targets, coins, ...) derived
// from one user-facing master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose) noexcept {
  return mix64(master + mix64(purpose + kGoldenGamma));
}

// A Monte-Carlo stream address: one user-facing master seed plus the index of
// the sample within an experiment.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  // Output stream_index of the SplitMix64 sequence keyed by the mixed master.
  // A bijection in the index for a fixed master, so distinct samples never
  // share a stream. (Plain master ^ index would make small masters permute
  // the same set of streams.)
  constexpr std::uint64_t subseed() const noexcept { return counter_bits(mix64(master_seed), stream_index); }

  friend constexpr bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

}  // namespace randquad
