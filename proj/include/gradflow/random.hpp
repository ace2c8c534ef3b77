#pragma once

#include <cstdint>

#include "gradflow/grid.hpp"

namespace gradflow {

/// Counter-based SplitMix64 stream. Value i of stream `seed` is
///   z = seed + (i + 1) * 0x9E3779B97F4A7C15
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z = z ^ (z >> 31)
/// with all arithmetic modulo 2^64. The uniform variate on [-1, 1) is
/// z * 2^-63 - 1.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t i) noexcept {
  std::uint64_t z = seed + (i + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline double uniform_pm1(std::uint64_t bits) noexcept {
  return static_cast<double>(bits) * 0x1p-63 - 1.0;
}

/// offset + amplitude * xi_i at grid point i (row-major), xi_i taken from
/// counter `stream * grid.size() + i`. `stream` separates the fields of one
/// multi-field initial condition.
inline Field seeded_random_field(const PeriodicGrid& grid, std::uint64_t seed, double offset,
                                 double amplitude, std::uint64_t stream = 0) {
  Field f(grid);
  const std::uint64_t base = stream * static_cast<std::uint64_t>(grid.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = offset + amplitude * uniform_pm1(splitmix64_at(seed, base + i));
  }
  return f;
}

}  // namespace gradflow
