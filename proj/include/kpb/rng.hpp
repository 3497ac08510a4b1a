#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace kpb {

// Uniform integer in [0, n) by rejection sampling on raw mt19937_64 output.
// std::uniform_int_distribution is implementation-defined, which would break
// the bit-reproducibility contract of FoldPlan and subsampling.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Fisher-Yates with the deterministic bounded() draw.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded(rng, i)]);
  }
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace kpb
