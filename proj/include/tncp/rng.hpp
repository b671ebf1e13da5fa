#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tncp {

/// Draws in [0,1) derived directly from mt19937_64 words, so that a seed
/// reproduces the same stream on every platform (std::uniform_real_distribution
/// makes no such guarantee).
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

/// Standard normal via Box-Muller.
inline double gaussian(std::mt19937_64& gen) {
  const double u1 = 1.0 - uniform01(gen);  // (0, 1]
  const double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace tncp
