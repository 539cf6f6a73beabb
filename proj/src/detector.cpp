#include "tagspot/detector.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tagspot/error.hpp"
#include "tagspot/fft.hpp"

namespace tagspot {

Denominator parse_denominator(std::string_view name) {
  if (name == "all" || name == "all_carriers") return Denominator::all_carriers;
  if (name == "non_null" || name == "non-null") return Denominator::non_null;
  throw ValidationError("unknown denominator convention '" + std::string(name) + "'");
}

std::string_view to_string(Denominator d) {
  return d == Denominator::all_carriers ? "all" : "non_null";
}

void DetectorConfig::validate() const {
  layout.validate();
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("detector: gamma must be in (0, 1)");
  if (!(noise_smoothing > 0.0 && noise_smoothing <= 1.0)) {
    throw ValidationError("detector: noise smoothing must be in (0, 1]");
  }
  if (!(com_band > 0.0 && com_band <= 1.0)) {
    throw ValidationError("detector: com band must be in (0, 1]");
  }
  if (initial_noise_power && !(*initial_noise_power > 0.0)) {
    throw ValidationError("detector: initial noise power must be > 0");
  }
}

std::vector<double> fold_spectrum(std::span<const cplx> bins, const CarrierLayout& layout) {
  if (static_cast<int>(bins.size()) != layout.fft_size) {
    throw ValidationError("fold_spectrum: expected " + std::to_string(layout.fft_size) + " bins");
  }
  std::vector<double> wide(static_cast<std::size_t>(layout.wide_total), 0.0);
  for (int w = 0; w < layout.wide_total; ++w) {
    double sum = 0.0;
    for (int o = 0; o < layout.thin_per_wide; ++o) {
      sum += std::norm(bins[static_cast<std::size_t>(layout.thin_bin(w, o))]);
    }
    wide[static_cast<std::size_t>(w)] = sum;
  }
  return wide;
}

namespace {

double masked_sum(std::span<const double> wide_powers, const WideCarrierMask& mask) {
  double in = 0.0;
  for (int w : mask.active) {
    if (w < 0 || static_cast<std::size_t>(w) >= wide_powers.size()) {
      throw ValidationError("tag_strength: mask carrier out of range");
    }
    in += wide_powers[static_cast<std::size_t>(w)];
  }
  return in;
}

void check_powers(std::span<const double> wide_powers, double total) {
  for (double p : wide_powers) {
    if (!(p >= 0.0)) throw ValidationError("tag_strength: negative or NaN power");
  }
  if (total <= 0.0) throw ValidationError("tag_strength: all-zero input");
}

}  // namespace

double tag_strength(std::span<const double> wide_powers, const WideCarrierMask& mask) {
  double total = 0.0;
  for (double p : wide_powers) total += p;
  check_powers(wide_powers, total);
  return masked_sum(wide_powers, mask) / total;
}

double tag_strength(std::span<const double> wide_powers, const WideCarrierMask& mask,
                    const CarrierLayout& layout, Denominator denominator) {
  if (denominator == Denominator::all_carriers) return tag_strength(wide_powers, mask);
  double total = 0.0;
  for (std::size_t w = 0; w < wide_powers.size(); ++w) {
    if (!layout.is_null(static_cast<int>(w))) total += wide_powers[w];
  }
  check_powers(wide_powers, total);
  return masked_sum(wide_powers, mask) / total;
}

CenterOfMass center_of_mass(std::span<const double> wide_powers, const CarrierLayout& layout,
                            double band) {
  const double centre = (static_cast<double>(wide_powers.size()) - 1.0) / 2.0;
  double total = 0.0;
  double moment = 0.0;
  for (std::size_t w = 0; w < wide_powers.size(); ++w) {
    total += wide_powers[w];
    moment += (static_cast<double>(w) - centre) * wide_powers[w];
  }
  if (total <= 0.0) throw ValidationError("center_of_mass: all-zero input");
  CenterOfMass com;
  com.position = moment / total;
  com.valid = std::abs(com.position) <= layout.wide_total * band / 2.0;
  return com;
}

double noise_tracker_update(double current, double interval_power, double smoothing) {
  if (!(smoothing > 0.0 && smoothing <= 1.0)) {
    throw ValidationError("noise tracker: smoothing must be in (0, 1]");
  }
  return current + smoothing * (interval_power - current);
}

Spotter::Spotter(const Codebook& codebook, DetectorConfig config)
    : config_(std::move(config)), masks_(codebook_masks(codebook, config_.layout)) {
  config_.validate();
  counted_.assign(static_cast<std::size_t>(config_.layout.wide_total), 1);
  if (config_.denominator == Denominator::non_null) {
    for (int w : config_.layout.null_wide) counted_[static_cast<std::size_t>(w)] = 0;
  }
}

std::vector<double> Spotter::strengths(std::span<const double> wide_powers) const {
  double total = 0.0;
  for (std::size_t w = 0; w < wide_powers.size(); ++w) {
    if (counted_[w]) total += wide_powers[w];
  }
  check_powers(wide_powers, total);
  std::vector<double> out;
  out.reserve(masks_.size());
  for (const auto& mask : masks_) out.push_back(masked_sum(wide_powers, mask) / total);
  return out;
}

std::pair<int, double> Spotter::best(std::span<const double> wide_powers) const {
  const auto s = strengths(wide_powers);
  int index = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] > s[static_cast<std::size_t>(index)]) index = static_cast<int>(i);
  }
  return {index, s[static_cast<std::size_t>(index)]};
}

SpotResult Spotter::spot(const IqFrame& samples) const {
  const auto& layout = config_.layout;
  const auto window = static_cast<std::size_t>(layout.fft_size);
  const auto step = static_cast<std::size_t>(std::max(1, layout.cp_length()));

  SpotResult result;
  if (samples.samples.size() < window) return result;
  const std::size_t count = (samples.samples.size() - window) / step + 1;
  result.summary.windows_total = count;

  struct WindowScore {
    bool candidate = false;
    DetectionEvent event;
  };
  std::vector<WindowScore> scores(count);

  Fft& fft = thread_fft(window);
  std::vector<cplx> bins(window);
  std::optional<double> noise = config_.initial_noise_power;

  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = i * step;
    const double power = mean_power(samples, start, start + window);
    if (!noise) noise = power;
    const double snr_db = (power > 0.0 && *noise > 0.0)
                              ? 10.0 * std::log10(power / *noise)
                              : -std::numeric_limits<double>::infinity();
    const bool gated =
        power == 0.0 || (config_.carrier_sense_snr_db && snr_db <= *config_.carrier_sense_snr_db);
    auto& score = scores[i];
    if (gated) {
      ++result.summary.windows_gated;
    } else {
      ++result.summary.windows_analyzed;
      fft.forward(std::span(samples.samples).subspan(start, window), bins);
      const auto wide = fold_spectrum(bins, layout);
      const auto [index, strength] = best(wide);
      const auto com = center_of_mass(wide, layout, config_.com_band);
      score.candidate = strength > config_.gamma && (com.valid || config_.emit_off_band);
      score.event = {start, index, strength, com.position, com.valid, snr_db};
    }
    // Candidate intervals may hold tag power, which must not leak into the
    // noise floor estimate.
    if (!score.candidate && power > 0.0) {
      noise = noise_tracker_update(*noise, power, config_.noise_smoothing);
    }
  }
  result.summary.final_noise_estimate = noise.value_or(0.0);

  // Windows i and j overlap when |i - j| * step < window.
  const std::size_t reach = (window - 1) / step;
  for (std::size_t i = 0; i < count; ++i) {
    if (!scores[i].candidate) continue;
    ++result.summary.candidates;
    const double s = scores[i].event.strength;
    bool maximal = true;
    const std::size_t lo = i >= reach ? i - reach : 0;
    const std::size_t hi = std::min(count - 1, i + reach);
    for (std::size_t j = lo; j <= hi && maximal; ++j) {
      if (j == i || !scores[j].candidate) continue;
      const double other = scores[j].event.strength;
      // Ties go to the earliest window.
      if (other > s || (other == s && j < i)) maximal = false;
    }
    if (maximal) result.events.push_back(scores[i].event);
  }
  return result;
}

SpotResult spot(const IqFrame& samples, const Codebook& codebook, const DetectorConfig& config) {
  return Spotter(codebook, config).spot(samples);
}

}  // namespace tagspot
