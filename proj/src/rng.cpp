#include "gwspeed/rng.hpp"

namespace gwspeed {

Stream::Stream(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x += 0x9e3779b97f4a7c15ull;
    word = splitmix64_mix(x);
  }
}

std::uint64_t Stream::below(std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t derived_seed(std::uint64_t master_seed, std::uint64_t index) {
  // Two rounds so that (seed, index) and (seed', index') collide only by
  // accident of the 64-bit mix, not by simple arithmetic relations.
  const std::uint64_t a = splitmix64_mix(master_seed + 0x632be59bd9b4e019ull);
  const std::uint64_t b = splitmix64_mix((index + 1) * 0x9e3779b97f4a7c15ull);
  return splitmix64_mix(a ^ splitmix64_mix(b + a));
}

Stream derive_stream(std::uint64_t master_seed, std::uint64_t index) {
  return Stream(derived_seed(master_seed, index));
}

}  // namespace gwspeed
