#pragma once

#include <cstdint>
#include <random>

namespace pibo {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed number `stream` of `master`. splitmix64 is a bijection, so distinct
/// streams of one master never collide.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(master + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

/// Uniform integer in [0, bound). Rejection sampling keeps the result identical
/// across standard libraries, unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound + 1) % bound;
  for (;;) {
    const std::uint64_t draw = rng();
    if (draw <= limit) return draw % bound;
  }
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace pibo
