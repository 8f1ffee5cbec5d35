#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gwspeed {

/// SplitMix64 output function; used for seeding and stream derivation.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/**
 * xoshiro256** engine with a split-style constructor.
 *
 * Satisfies UniformRandomBitGenerator, but the simulation code draws only
 * through the uniform helpers below so results do not depend on the
 * standard library's distribution implementations.
 */
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on (0,1], 53-bit resolution.
  double uniform_open_closed() {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform on [0,1), 53-bit resolution.
  double uniform_closed_open() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n); n > 0. Lemire's nearly-divisionless method.
  std::uint64_t below(std::uint64_t n);

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_;
};

/// Independent stream for task `index` under `master_seed`. Same inputs give
/// the same stream; distinct indices give statistically independent streams.
Stream derive_stream(std::uint64_t master_seed, std::uint64_t index);

/// The 64-bit seed that derive_stream feeds to the engine (logged in manifests).
std::uint64_t derived_seed(std::uint64_t master_seed, std::uint64_t index);

}  // namespace gwspeed
