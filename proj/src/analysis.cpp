#include "tagspot/analysis.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/non_central_beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "tagspot/error.hpp"

namespace tagspot {

namespace {

constexpr double kPi = std::numbers::pi;

void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
}

void require_trials(std::size_t trials) {
  if (trials < 1000) throw ValidationError("Monte Carlo estimators need at least 1000 trials");
}

// P(X1 / (X1 + X2) > x) for independent chi-square X1, X2 with d1, d2 dof.
double beta_tail(double d1, double d2, double x) {
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  return boost::math::ibetac(d1 / 2.0, d2 / 2.0, x);
}

// Signal-to-noise ratio per active thin carrier from the thick-carrier SNR.
double per_thin_snr(double snr_db, const CarrierLayout& layout) {
  return static_cast<double>(layout.thin_per_wide) / layout.active_thin_per_wide *
         std::pow(10.0, snr_db / 10.0);
}

}  // namespace

double leakage_single(int k, double delta) {
  const double x = k + delta;
  if (delta == 0.0) return k == 0 ? 1.0 : 0.0;
  if (std::abs(x) < 1e-12) return 1.0;
  const double s = std::sin(kPi * x) / (kPi * x);
  return s * s;
}

double leakage_block(int k) {
  if (k < 1) throw ValidationError("leakage_block: k must be >= 1");
  double partial = 0.0;
  for (int c = 1; c < k; ++c) partial += 1.0 / (static_cast<double>(c) * c);
  return kPi * kPi / 6.0 - partial;
}

double expected_offset_leak(double max_offset, const CarrierLayout& layout) {
  layout.validate();
  if (!(max_offset > 0.0)) throw ValidationError("expected_offset_leak: max offset must be > 0");
  const int n = layout.fft_size;
  const auto pairs = layout.group_map();

  // Probability that wide carrier w is unused given that `active` is used,
  // when every group bit is an independent fair coin.
  const auto inactive_probability = [&](int w, int active, int partner) {
    if (w == active) return 0.0;
    if (w == partner || layout.is_null(w)) return 1.0;
    return 0.5;
  };

  const auto leak_at = [&](double delta) {
    double sum = 0.0;
    int sources = 0;
    for (const auto& pair : pairs) {
      for (int choice = 0; choice < 2; ++choice) {
        const int active = pair[static_cast<std::size_t>(choice)];
        const int partner = pair[static_cast<std::size_t>(1 - choice)];
        for (int j = 0; j < layout.active_thin_per_wide; ++j) {
          const int source = layout.thin_bin(active, layout.first_active_offset() + j);
          ++sources;
          for (int w = 0; w < layout.wide_total; ++w) {
            const double weight = inactive_probability(w, active, partner);
            if (weight == 0.0) continue;
            for (int o = 0; o < layout.thin_per_wide; ++o) {
              int d = layout.thin_bin(w, o) - source;
              d = ((d % n) + n) % n;
              if (d >= n / 2) d -= n;
              sum += weight * leakage_single(d, -delta);
            }
          }
        }
      }
    }
    return sum / sources;
  };

  using boost::math::quadrature::gauss_kronrod;
  const double integral = gauss_kronrod<double, 31>::integrate(leak_at, 0.0, max_offset, 8, 1e-10);
  return integral / max_offset;
}

int denominator_dof(const CarrierLayout& layout, Denominator denominator) {
  const int wide = denominator == Denominator::non_null ? layout.groups
                                                        : layout.wide_total - layout.groups;
  return 2 * layout.thin_per_wide * wide;
}

double naive_threshold_snr_db(double gamma, const CarrierLayout& layout, Denominator denominator) {
  require_gamma(gamma);
  const double active = layout.active_thin_total();
  const double in_mask = static_cast<double>(layout.thin_per_wide) * layout.groups;
  const double total = in_mask + denominator_dof(layout, denominator) / 2.0;
  // (active p + in_mask n) / (active p + total n) = gamma, solved for p / n.
  const double ratio = (gamma * total - in_mask) / (active * (1.0 - gamma));
  if (ratio <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ratio * layout.active_thin_per_wide / layout.thin_per_wide);
}

double pf_single(double gamma, const CarrierLayout& layout, Denominator denominator) {
  require_gamma(gamma);
  layout.validate();
  const double numerator = 2.0 * layout.thin_per_wide * layout.groups;
  return beta_tail(numerator, denominator_dof(layout, denominator), gamma);
}

double pd_single(const AnalysisModel& model) {
  require_gamma(model.gamma);
  const auto& layout = model.layout;
  layout.validate();
  const double a = 2.0 * layout.active_thin_per_wide * layout.groups;
  const double b = 2.0 * (layout.thin_per_wide - layout.active_thin_per_wide) * layout.groups;
  const double r = denominator_dof(layout, model.denominator);
  const double k = model.gamma / (1.0 - model.gamma);
  const double snr = per_thin_snr(model.snr_db, layout);
  if (std::isinf(snr)) return 1.0;

  // T = S_P / (S_Q + S_R) is independent of U = S_Q / (S_Q + S_R), and the
  // detection event (S_P + S_Q) / S_R > k is T > k - (1 + k) U.
  const auto tail_t = [&](double tau) -> double {
    if (tau <= 0.0) return 1.0;
    if (model.fading == Fading::wideband) {
      const double scaled = tau / (1.0 + snr);
      return beta_tail(a, b + r, scaled / (1.0 + scaled));
    }
    if (snr == 0.0) return beta_tail(a, b + r, tau / (1.0 + tau));
    boost::math::non_central_beta_distribution<double> dist(a / 2.0, (b + r) / 2.0, a * snr);
    return boost::math::cdf(boost::math::complement(dist, tau / (1.0 + tau)));
  };

  if (b == 0.0) return tail_t(k);

  boost::math::beta_distribution<double> u_dist(b / 2.0, r / 2.0);
  const double mean = b / (b + r);
  const double sd = std::sqrt(mean * (1.0 - mean) / ((b + r) / 2.0 + 1.0));
  const double lo = std::max(0.0, mean - 40.0 * sd);
  const double hi = std::min(1.0, mean + 40.0 * sd);
  const auto integrand = [&](double u) {
    return boost::math::pdf(u_dist, u) * tail_t(k - (1.0 + k) * u);
  };
  using boost::math::quadrature::gauss_kronrod;
  const double value = gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 12, 1e-12);
  return std::clamp(value, 0.0, 1.0);
}

std::vector<double> noise_wide_powers(const CarrierLayout& layout, Rng& rng) {
  std::gamma_distribution<double> wide_power(layout.thin_per_wide, 1.0);
  std::vector<double> powers(static_cast<std::size_t>(layout.wide_total));
  for (double& p : powers) p = wide_power(rng);
  return powers;
}

namespace {

double denominator_sum(std::span<const double> powers, const CarrierLayout& layout,
                       Denominator denominator) {
  double total = 0.0;
  for (std::size_t w = 0; w < powers.size(); ++w) {
    if (denominator == Denominator::all_carriers || !layout.is_null(static_cast<int>(w))) {
      total += powers[w];
    }
  }
  return total;
}

}  // namespace

Estimate pf_family_mc(double gamma, const Codebook& codebook, const CarrierLayout& layout,
                      std::size_t trials, std::uint64_t seed, Denominator denominator) {
  require_gamma(gamma);
  require_trials(trials);
  const auto masks = codebook_masks(codebook, layout);
  return run_trials(trials, seed, [&](Rng& rng, std::size_t) {
    const auto powers = noise_wide_powers(layout, rng);
    double best = 0.0;
    for (const auto& mask : masks) {
      double in = 0.0;
      for (int w : mask.active) in += powers[static_cast<std::size_t>(w)];
      best = std::max(best, in);
    }
    return best / denominator_sum(powers, layout, denominator) > gamma;
  });
}

Estimate pf_pairs_bound(double gamma, const CarrierLayout& layout, std::size_t trials,
                        std::uint64_t seed, Denominator denominator) {
  require_gamma(gamma);
  require_trials(trials);
  const auto pairs = layout.group_map();
  return run_trials(trials, seed, [&](Rng& rng, std::size_t) {
    const auto powers = noise_wide_powers(layout, rng);
    double larger = 0.0;
    for (const auto& [first, second] : pairs) {
      larger += std::max(powers[static_cast<std::size_t>(first)],
                         powers[static_cast<std::size_t>(second)]);
    }
    return larger / denominator_sum(powers, layout, denominator) > gamma;
  });
}

namespace {

// Received wide-carrier powers for a transmitted mask on the thin-carrier
// model: signal on the active thin carriers, CN(0, n) on every bin.
std::vector<double> received_wide_powers(const WideCarrierMask& mask, const CarrierLayout& layout,
                                         double noise, Fading fading, Rng& rng) {
  std::vector<cplx> bins(static_cast<std::size_t>(layout.fft_size));
  for (cplx& b : bins) b = complex_normal(rng, noise);
  for (int w : mask.active) {
    for (int j = 0; j < layout.active_thin_per_wide; ++j) {
      const auto bin = static_cast<std::size_t>(layout.thin_bin(w, layout.first_active_offset() + j));
      bins[bin] += fading == Fading::wideband ? complex_normal(rng, 1.0)
                                              : std::polar(1.0, uniform_phase(rng));
    }
  }
  return fold_spectrum(bins, layout);
}

}  // namespace

Estimate pm_mc(double snr_db, const Codebook& codebook, const CarrierLayout& layout,
               Fading fading, std::size_t trials, std::uint64_t seed) {
  require_trials(trials);
  const auto masks = codebook_masks(codebook, layout);
  const double noise = noise_power_for_snr(snr_db, 1.0, layout);
  std::uniform_int_distribution<std::size_t> pick(0, masks.size() - 1);
  return run_trials(trials, seed, [&](Rng& rng, std::size_t) {
    const std::size_t sent = pick(rng);
    const auto powers = received_wide_powers(masks[sent], layout, noise, fading, rng);
    std::size_t argmax = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      double in = 0.0;
      for (int w : masks[i].active) in += powers[static_cast<std::size_t>(w)];
      if (in > best) {
        best = in;
        argmax = i;
      }
    }
    return argmax != sent;
  });
}

Estimate pm_mc_full_code(double snr_db, const CarrierLayout& layout, Fading fading,
                         std::size_t trials, std::uint64_t seed) {
  require_trials(trials);
  const double noise = noise_power_for_snr(snr_db, 1.0, layout);
  const auto pairs = layout.group_map();
  return run_trials(trials, seed, [&](Rng& rng, std::size_t) {
    WideCarrierMask mask;
    for (const auto& pair : pairs) {
      mask.active.push_back(pair[std::uniform_int_distribution<std::size_t>(0, 1)(rng)]);
    }
    std::sort(mask.active.begin(), mask.active.end());
    const auto powers = received_wide_powers(mask, layout, noise, fading, rng);
    for (const auto& [first, second] : pairs) {
      const bool first_sent = mask.contains(first);
      const double sent = powers[static_cast<std::size_t>(first_sent ? first : second)];
      const double other = powers[static_cast<std::size_t>(first_sent ? second : first)];
      if (other > sent) return true;
    }
    return false;
  });
}

std::vector<SweepPoint> sweep_active_carriers(int total, double snr_db, int thin_per_wide,
                                              std::size_t trials, std::uint64_t seed) {
  if (total < 2 || thin_per_wide < 1) throw ValidationError("sweep: need total >= 2, alpha >= 1");
  const double rho = 1.0 + std::pow(10.0, snr_db / 10.0);
  std::vector<SweepPoint> out;
  for (int q = 1; q < total; ++q) {
    const double d1 = 2.0 * thin_per_wide * q;
    const double d2 = 2.0 * thin_per_wide * (total - q);
    // Median of the noise-only in/out power ratio, via its Beta form.
    const double b_med = boost::math::ibeta_inv(d1 / 2.0, d2 / 2.0, 0.5);
    const double k0 = rho * b_med / (1.0 - b_med);
    SweepPoint point;
    point.active = q;
    point.gamma0 = k0 / (1.0 + k0);
    point.pf = beta_tail(d1, d2, point.gamma0);
    if (trials > 0) {
      std::chi_squared_distribution<double> in_dist(d1);
      std::chi_squared_distribution<double> out_dist(d2);
      point.pd_check = run_trials(trials, seed + static_cast<std::uint64_t>(q),
                                  [&](Rng& rng, std::size_t) {
                                    auto in = in_dist;
                                    auto outd = out_dist;
                                    return rho * in(rng) / outd(rng) > k0;
                                  });
    }
    out.push_back(point);
  }
  return out;
}

double range_gain(double snr_gap_db, double path_loss_exponent) {
  if (!(path_loss_exponent > 0.0)) throw ValidationError("range_gain: exponent must be > 0");
  return std::pow(10.0, snr_gap_db / (10.0 * path_loss_exponent));
}

int payload_frames(double payload_bytes, const FrameAccounting& accounting) {
  if (!(payload_bytes > 0.0)) throw ValidationError("overhead: payload must be > 0");
  return static_cast<int>(std::ceil(payload_bytes * 8.0 / accounting.payload_bits_per_frame));
}

double overhead(double payload_bytes, const FrameAccounting& accounting) {
  const double frames = payload_frames(payload_bytes, accounting) + accounting.sync_frames;
  return accounting.tag_frames / frames;
}

RocCurve roc_single(AnalysisModel model, const std::vector<double>& gammas) {
  RocCurve curve;
  for (double g : gammas) {
    model.gamma = g;
    curve.points.push_back({g, pd_single(model), pf_single(g, model.layout, model.denominator), 0.0});
  }
  return curve;
}

RocCurve roc_family(AnalysisModel model, const Codebook* codebook,
                    const std::vector<double>& gammas, std::size_t trials, std::uint64_t seed) {
  RocCurve curve;
  curve.trials = trials;
  curve.seed = seed;
  for (double g : gammas) {
    model.gamma = g;
    const Estimate pf = codebook
                            ? pf_family_mc(g, *codebook, model.layout, trials, seed, model.denominator)
                            : pf_pairs_bound(g, model.layout, trials, seed, model.denominator);
    curve.points.push_back({g, pd_single(model), pf.p(), pf.ci95()});
  }
  return curve;
}

}  // namespace tagspot
