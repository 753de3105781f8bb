#pragma once

#include <cstdint>
#include <random>

namespace patchup {

/// All stochastic operations take an explicit Rng so runs are reproducible
/// and concurrent callers can own independent streams.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Beta(alpha, alpha) draw via the gamma-ratio construction.
inline double sample_beta(double alpha, Rng& rng) {
  std::gamma_distribution<double> g(alpha, 1.0);
  double a = g(rng);
  double b = g(rng);
  if (a + b == 0.0) return 0.5;
  return a / (a + b);
}

}  // namespace patchup
