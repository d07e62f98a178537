// Deterministic randomness helpers. std:: distributions are
// implementation-defined, so every draw that can reach an output file
// goes through these fixed mappings over mt19937_64.
#pragma once

#include <cstdint>
#include <vector>

#include <random>

namespace hybridrec {

using Rng = std::mt19937_64;

// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t uniform_u64(Rng& rng, std::uint64_t n) {
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline std::uint32_t uniform_u32(Rng& rng, std::uint32_t n) {
  return static_cast<std::uint32_t>(uniform_u64(rng, n));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_real(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_real(rng);
}

// Fisher-Yates; std::shuffle's algorithm is unspecified.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_u64(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

// Index into `weights` with probability proportional to weight.
// Total weight must be positive; negative weights are invalid.
inline std::size_t weighted_pick(Rng& rng, const std::vector<double>& weights,
                                 double total) {
  double u = uniform_real(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // Floating-point slack: fall back to the last positive weight.
  for (std::size_t i = weights.size(); i > 0; --i) {
    if (weights[i - 1] > 0.0) return i - 1;
  }
  return weights.size() - 1;
}

}  // namespace hybridrec
