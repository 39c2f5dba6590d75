#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace bartree {

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream tags used to split one user seed into independent streams.
/// Fixed forever: changing them changes every simulated dataset.
inline constexpr std::uint64_t kMaskStream = 0x6d61736b00000001ULL;   // "mask"
inline constexpr std::uint64_t kNoiseStream = 0x6e6f697365000002ULL;  // "noise"
inline constexpr std::uint64_t kReplicateStream = 0x7265706c00000003ULL;

/// Seed of sub-stream `index` under tag `stream`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return mix64(mix64(seed ^ stream) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

/// Counter-based generator: draw i is mix64(key + i * golden). Satisfies
/// std::uniform_random_bit_generator; normals via Box-Muller so that the
/// stream is identical across standard libraries.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) : key_(mix64(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bartree
