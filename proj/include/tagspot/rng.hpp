#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace tagspot {

using Rng = std::mt19937_64;
using cplx = std::complex<double>;

/// SplitMix64 finaliser; spreads nearby integers over the full 64-bit range.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for one Monte Carlo trial. Depends only on (master seed, trial), so
/// results do not change with the number of worker threads.
constexpr std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  return mix64(mix64(master) ^ mix64(trial + 0x5851f42d4c957f2dULL));
}

inline Rng trial_rng(std::uint64_t master, std::uint64_t trial) {
  return Rng(trial_seed(master, trial));
}

/// Circular complex Gaussian with E|z|^2 = power.
inline cplx complex_normal(Rng& rng, double power) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(power / 2.0);
  const double re = normal(rng);
  const double im = normal(rng);
  return {scale * re, scale * im};
}

inline double uniform_phase(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 2.0 * 3.14159265358979323846)(rng);
}

}  // namespace tagspot
