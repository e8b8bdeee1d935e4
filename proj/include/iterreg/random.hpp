#pragma once

#include <cstdint>
#include <random>

namespace iterreg {

using Rng = std::mt19937_64;

// Independent stream for (seed, stream). Different streams share no state.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x1234567u};
  return Rng(seq);
}

// Seed for a sub-task, e.g. one (m, repetition) cell of a sweep.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  Rng r = make_rng(seed ^ (a * 0x9E3779B97F4A7C15ull), b + 0x5851F42D4C957F2Dull);
  return r();
}

}  // namespace iterreg
