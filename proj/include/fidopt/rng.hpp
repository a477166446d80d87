#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace fidopt {

// Deterministic random utilities. std::mt19937_64 has a standard-specified
// output sequence, but the standard *distributions* do not, so every draw
// that must reproduce bit-exactly across toolchains goes through the helpers
// below instead of <random> distributions.

using RngEngine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stable sub-seed derivation: one base seed, one stream tag per consumer.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0x6a09e667f3bcc909ull + stream * 0x9e3779b97f4a7c15ull);
  splitmix64(s);
  return splitmix64(s);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(RngEngine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(RngEngine& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Unbiased integer in [0, n) via 128-bit multiply-shift.
inline std::uint64_t uniform_below(RngEngine& rng, std::uint64_t n) {
  while (true) {
    std::uint64_t x = rng();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    std::uint64_t low = static_cast<std::uint64_t>(m);
    if (low >= n) {
      std::uint64_t threshold = (0ull - n) % n;
      if (low < threshold) continue;
    }
    return static_cast<std::uint64_t>(m >> 64);
  }
}

template <typename T>
void shuffle_in_place(std::vector<T>& items, RngEngine& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t k = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[k]);
  }
}

// Identity permutation of size n, then Fisher-Yates shuffled.
inline std::vector<std::size_t> random_permutation(std::size_t n, RngEngine& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  shuffle_in_place(perm, rng);
  return perm;
}

}  // namespace fidopt
