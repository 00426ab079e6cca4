#pragma once

#include <cstdint>
#include <limits>

namespace echosim {

/// Counter-based stream derivation. Every (master seed, key...) tuple maps to
/// an independent 64-bit state, so per-user work can run in any order or on
/// any thread and still draw the same numbers.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) noexcept;

/// Stream purposes, used as the last derivation key.
enum class Stream : std::uint64_t {
  Recommend = 1,
  ItemCategories = 2,
  UserInit = 3,
  SocialLinks = 4,
  PairSample = 5,
  Fallback = 6,
};

/// SplitMix64 engine. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  static Rng stream(std::uint64_t master, std::uint64_t a, std::uint64_t b, Stream purpose) noexcept {
    return Rng(derive_seed(master, a, b, static_cast<std::uint64_t>(purpose)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard exponential variate.
  double exponential() noexcept;

  /// Standard normal variate (Marsaglia polar method).
  double normal() noexcept;

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
};

}  // namespace echosim
