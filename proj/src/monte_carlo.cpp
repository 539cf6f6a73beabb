#include "tagspot/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace tagspot {

namespace {

std::atomic<unsigned> g_workers{0};

}  // namespace

double Estimate::ci95() const {
  if (trials == 0) return 1.0;
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double ph = p();
  const double denom = 1.0 + z * z / n;
  return z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
}

double Estimate::sigma_at(double reference) const {
  if (trials == 0) return 1.0;
  return std::sqrt(reference * (1.0 - reference) / static_cast<double>(trials));
}

void set_worker_count(unsigned workers) { g_workers = workers; }

unsigned worker_count() {
  const unsigned w = g_workers.load();
  if (w != 0) return w;
  return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<std::size_t> run_trials_multi(
    std::size_t trials, std::uint64_t seed, int outcomes,
    const std::function<std::uint64_t(Rng&, std::size_t)>& trial) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(1, trials)));
  std::vector<std::vector<std::size_t>> partial(workers,
                                                std::vector<std::size_t>(static_cast<std::size_t>(outcomes)));
  const auto body = [&](unsigned w) {
    auto& counts = partial[w];
    for (std::size_t i = w; i < trials; i += workers) {
      Rng rng = trial_rng(seed, i);
      const std::uint64_t bits = trial(rng, i);
      for (int k = 0; k < outcomes; ++k) {
        if ((bits >> k) & 1U) ++counts[static_cast<std::size_t>(k)];
      }
    }
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
  }
  std::vector<std::size_t> total(static_cast<std::size_t>(outcomes));
  for (const auto& counts : partial) {
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += counts[k];
  }
  return total;
}

Estimate run_trials(std::size_t trials, std::uint64_t seed,
                    const std::function<bool(Rng&, std::size_t)>& trial) {
  const auto counts = run_trials_multi(trials, seed, 1, [&](Rng& rng, std::size_t i) {
    return static_cast<std::uint64_t>(trial(rng, i));
  });
  return {counts[0], trials};
}

double two_proportion_z(const Estimate& a, const Estimate& b) {
  const double pooled = static_cast<double>(a.hits + b.hits) / static_cast<double>(a.trials + b.trials);
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(a.trials) + 1.0 / static_cast<double>(b.trials)));
  if (se == 0.0) return 0.0;
  return (a.p() - b.p()) / se;
}

}  // namespace tagspot
