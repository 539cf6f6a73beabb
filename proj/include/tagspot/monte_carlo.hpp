#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "tagspot/rng.hpp"

namespace tagspot {

/// Binomial proportion from a Monte Carlo run.
struct Estimate {
  std::size_t hits = 0;
  std::size_t trials = 0;

  double p() const { return trials == 0 ? 0.0 : static_cast<double>(hits) / trials; }
  /// Wilson score 95% half-width.
  double ci95() const;
  /// Standard error sqrt(p(1-p)/n) evaluated at `reference`.
  double sigma_at(double reference) const;
  /// Flagged when the half-width exceeds 20% of the estimate.
  bool unreliable() const { return ci95() > 0.2 * p(); }
};

/// Number of worker threads used by run_trials (default: hardware concurrency).
void set_worker_count(unsigned workers);
unsigned worker_count();

/// Runs `trial` once per index in [0, trials) with an RNG seeded from
/// (seed, index) and counts the trials that returned true. The count is
/// independent of the worker count.
Estimate run_trials(std::size_t trials, std::uint64_t seed,
                    const std::function<bool(Rng&, std::size_t)>& trial);

/// Generic trial loop: `trial` returns a bitmask of outcomes; the result holds
/// one hit count per bit. Used when several statistics share the same draws.
std::vector<std::size_t> run_trials_multi(std::size_t trials, std::uint64_t seed, int outcomes,
                                          const std::function<std::uint64_t(Rng&, std::size_t)>& trial);

/// z statistic of the pooled two-proportion test.
double two_proportion_z(const Estimate& a, const Estimate& b);

}  // namespace tagspot
