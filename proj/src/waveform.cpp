#include "tagspot/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tagspot/error.hpp"
#include "tagspot/fft.hpp"

namespace tagspot {

namespace {

constexpr int kDataFftSize = 64;

}  // namespace

void validate(const IqFrame& frame) {
  if (frame.samples.empty()) throw ValidationError("iq frame: no samples");
  for (const cplx& s : frame.samples) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
      throw ValidationError("iq frame: non-finite sample");
    }
  }
}

double mean_power(const IqFrame& frame, std::size_t begin, std::size_t end) {
  end = std::min(end, frame.samples.size());
  if (begin >= end) return 0.0;
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += std::norm(frame.samples[i]);
  return sum / static_cast<double>(end - begin);
}

double TagSpectrum::total_power() const {
  double sum = 0.0;
  for (const cplx& a : amplitudes) sum += std::norm(a);
  return sum;
}

TagSpectrum build_tag_spectrum(const WideCarrierMask& mask, const CarrierLayout& layout,
                               double total_power, Rng& rng) {
  validate_mask(mask, layout);
  if (!(total_power >= 0.0)) throw ValidationError("tag spectrum: total_power must be >= 0");
  TagSpectrum spectrum;
  spectrum.amplitudes.assign(static_cast<std::size_t>(layout.fft_size), cplx{});
  const int per_wide = layout.active_thin_per_wide;
  const double magnitude =
      std::sqrt(total_power / static_cast<double>(per_wide * static_cast<int>(mask.active.size())));
  for (int wide : mask.active) {
    for (int k = 0; k < per_wide; ++k) {
      const int bin = layout.thin_bin(wide, layout.first_active_offset() + k);
      // The phase is drawn even at zero power so the RNG stream does not
      // depend on the power level.
      spectrum.amplitudes[static_cast<std::size_t>(bin)] = std::polar(magnitude, uniform_phase(rng));
    }
  }
  return spectrum;
}

IqFrame synthesize_tag(const TagSpectrum& spectrum, const CarrierLayout& layout) {
  const auto n = static_cast<std::size_t>(layout.fft_size);
  if (spectrum.amplitudes.size() != n) {
    throw ValidationError("synthesize_tag: spectrum length != fft_size");
  }
  const auto cp = static_cast<std::size_t>(layout.cp_length());
  IqFrame frame;
  frame.samples.resize(n + cp);
  thread_fft(n).inverse(spectrum.amplitudes, std::span(frame.samples).subspan(cp, n));
  std::copy(frame.samples.end() - static_cast<std::ptrdiff_t>(cp), frame.samples.end(),
            frame.samples.begin());
  return frame;
}

double papr_db(const IqFrame& frame) {
  if (frame.samples.empty()) throw ValidationError("papr: empty frame");
  double peak = 0.0;
  double sum = 0.0;
  for (const cplx& s : frame.samples) {
    const double p = std::norm(s);
    peak = std::max(peak, p);
    sum += p;
  }
  if (sum == 0.0) throw ValidationError("papr: all-zero frame");
  return 10.0 * std::log10(peak / (sum / static_cast<double>(frame.samples.size())));
}

PaprLimitedTag synthesize_tag_papr_limited(const WideCarrierMask& mask, const CarrierLayout& layout,
                                           double total_power, double papr_cap_db, Rng& rng,
                                           int max_attempts) {
  if (max_attempts < 1) throw ValidationError("papr limited tag: max_attempts must be >= 1");
  PaprLimitedTag best;
  best.papr_db = std::numeric_limits<double>::infinity();
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    TagSpectrum spectrum = build_tag_spectrum(mask, layout, total_power, rng);
    IqFrame frame = synthesize_tag(spectrum, layout);
    const double papr = papr_db(frame);
    if (papr < best.papr_db) {
      best.frame = std::move(frame);
      best.spectrum = std::move(spectrum);
      best.papr_db = papr;
    }
    best.attempts = attempt;
    if (papr <= papr_cap_db) {
      best.cap_met = true;
      break;
    }
  }
  return best;
}

std::vector<int> data_subcarriers() {
  std::vector<int> out;
  for (int k = -26; k <= 26; ++k) {
    if (k == 0 || std::abs(k) == 7 || std::abs(k) == 21) continue;
    out.push_back(k);
  }
  return out;
}

IqFrame synthesize_data_interference(const CarrierLayout& layout, int n_frames,
                                     double total_power, Rng& rng) {
  if (n_frames < 1) throw ValidationError("data interference: n_frames must be >= 1");
  if (!(total_power >= 0.0)) throw ValidationError("data interference: total_power must be >= 0");
  const auto n = static_cast<std::size_t>(kDataFftSize);
  const auto cp = static_cast<std::size_t>(std::lround(kDataFftSize * layout.cp_fraction));
  const auto carriers = data_subcarriers();
  const double magnitude = std::sqrt(total_power / static_cast<double>(carriers.size()));
  std::uniform_int_distribution<int> quadrant(0, 3);
  constexpr double kPi = 3.14159265358979323846;

  IqFrame out;
  out.samples.reserve(static_cast<std::size_t>(n_frames) * (n + cp));
  std::vector<cplx> spectrum(n);
  std::vector<cplx> body(n);
  for (int f = 0; f < n_frames; ++f) {
    std::fill(spectrum.begin(), spectrum.end(), cplx{});
    for (int k : carriers) {
      const double phase = kPi / 4.0 + kPi / 2.0 * quadrant(rng);
      spectrum[static_cast<std::size_t>((k + kDataFftSize) % kDataFftSize)] =
          std::polar(magnitude, phase);
    }
    thread_fft(n).inverse(spectrum, body);
    out.samples.insert(out.samples.end(), body.end() - static_cast<std::ptrdiff_t>(cp), body.end());
    out.samples.insert(out.samples.end(), body.begin(), body.end());
  }
  return out;
}

}  // namespace tagspot
