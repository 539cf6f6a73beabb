#include "tagspot/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tagspot/error.hpp"
#include "tagspot/fft.hpp"

namespace tagspot {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

Fading parse_fading(std::string_view name) {
  if (name == "none") return Fading::none;
  if (name == "narrowband") return Fading::narrowband;
  if (name == "wideband" || name == "wideband-rayleigh") return Fading::wideband;
  throw ValidationError("unknown fading model '" + std::string(name) + "'");
}

std::string_view to_string(Fading fading) {
  switch (fading) {
    case Fading::none:
      return "none";
    case Fading::narrowband:
      return "narrowband";
    case Fading::wideband:
      return "wideband";
  }
  return "none";
}

void ChannelSpec::validate() const {
  if (!std::isfinite(cfo)) throw ValidationError("channel: cfo must be finite");
  if (std::abs(cfo) > max_abs_cfo) {
    throw ValidationError("channel: |cfo| exceeds " + std::to_string(max_abs_cfo) +
                          " thin carriers");
  }
  if (snr_db && !std::isfinite(*snr_db)) throw ValidationError("channel: snr must be finite");
  if (interference && !std::isfinite(interference->sir_db)) {
    throw ValidationError("channel: sir must be finite");
  }
}

double noise_power_for_snr(double snr_db, double per_thin_power, const CarrierLayout& layout) {
  if (!(per_thin_power > 0.0)) throw ValidationError("noise_power_for_snr: p must be > 0");
  return layout.active_thin_per_wide * per_thin_power /
         (layout.thin_per_wide * std::pow(10.0, snr_db / 10.0));
}

IqFrame apply_awgn(IqFrame frame, double noise_power, Rng& rng) {
  if (!(noise_power >= 0.0)) throw ValidationError("apply_awgn: noise power must be >= 0");
  if (noise_power == 0.0) return frame;
  for (cplx& s : frame.samples) s += complex_normal(rng, noise_power);
  return frame;
}

IqFrame apply_cfo(IqFrame frame, double cfo, const CarrierLayout& layout) {
  if (cfo == 0.0) return frame;
  const double step = 2.0 * kPi * cfo / layout.fft_size;
  for (std::size_t k = 0; k < frame.samples.size(); ++k) {
    frame.samples[k] *= std::polar(1.0, step * static_cast<double>(k));
  }
  return frame;
}

TagSpectrum apply_fading(TagSpectrum spectrum, Fading fading, Rng& rng) {
  switch (fading) {
    case Fading::none:
      break;
    case Fading::narrowband: {
      const cplx g = std::polar(1.0, uniform_phase(rng));
      for (cplx& a : spectrum.amplitudes) a *= g;
      break;
    }
    case Fading::wideband:
      for (cplx& a : spectrum.amplitudes) a *= complex_normal(rng, 1.0);
      break;
  }
  return spectrum;
}

IqFrame apply_fading(IqFrame frame, Fading fading, const CarrierLayout& layout, Rng& rng) {
  if (fading == Fading::none) return frame;
  if (fading == Fading::narrowband) {
    const cplx g = std::polar(1.0, uniform_phase(rng));
    for (cplx& s : frame.samples) s *= g;
    return frame;
  }
  const auto n = static_cast<std::size_t>(layout.fft_size);
  const auto cp = static_cast<std::size_t>(layout.cp_length());
  const std::size_t symbol = n + cp;
  if (frame.samples.empty() || frame.samples.size() % symbol != 0) {
    throw ValidationError("wideband fading: frame length must be a multiple of " +
                          std::to_string(symbol));
  }
  Fft& fft = thread_fft(n);
  std::vector<cplx> bins(n);
  for (std::size_t start = 0; start < frame.samples.size(); start += symbol) {
    auto block = std::span(frame.samples).subspan(start, symbol);
    fft.forward(block.subspan(cp, n), bins);
    for (cplx& b : bins) b *= complex_normal(rng, 1.0);
    fft.inverse(bins, block.subspan(cp, n));
    std::copy(block.end() - static_cast<std::ptrdiff_t>(cp), block.end(), block.begin());
  }
  return frame;
}

IqFrame mix(std::span<const MixInput> inputs) {
  IqFrame out;
  std::size_t extent = 0;
  for (const MixInput& in : inputs) {
    if (in.frame == nullptr) throw ValidationError("mix: null frame");
    extent = std::max(extent, in.offset + in.frame->samples.size());
  }
  if (!inputs.empty()) out.sample_rate = inputs.front().frame->sample_rate;
  out.samples.assign(extent, cplx{});
  for (const MixInput& in : inputs) {
    for (std::size_t i = 0; i < in.frame->samples.size(); ++i) {
      out.samples[in.offset + i] += in.gain * in.frame->samples[i];
    }
  }
  return out;
}

double gain_for_sir(const IqFrame& signal, const IqFrame& interferer, std::size_t offset,
                    double sir_db) {
  const std::size_t begin = offset;
  const std::size_t end = std::min(signal.samples.size(), offset + interferer.samples.size());
  if (begin >= end) throw ValidationError("gain_for_sir: frames do not overlap");
  const double ps = mean_power(signal, begin, end);
  const double pi = mean_power(interferer, 0, end - begin);
  if (pi == 0.0) throw ValidationError("gain_for_sir: silent interferer");
  return std::sqrt(ps / (pi * std::pow(10.0, sir_db / 10.0)));
}

IqFrame impair(const IqFrame& input, const ChannelSpec& spec, double per_thin_power,
               const CarrierLayout& layout, Rng& rng) {
  spec.validate();
  IqFrame frame = apply_fading(input, spec.fading, layout, rng);
  frame = apply_cfo(std::move(frame), spec.cfo, layout);

  if (spec.interference) {
    const auto& inter = *spec.interference;
    if (inter.offset >= frame.samples.size()) {
      throw ValidationError("impair: interference offset beyond the input");
    }
    const std::size_t span = frame.samples.size() - inter.offset;
    IqFrame source;
    if (inter.kind == InterferenceSpec::Kind::data) {
      const int symbol = layout.wide_total + static_cast<int>(std::lround(layout.wide_total * layout.cp_fraction));
      const int frames = static_cast<int>((span + static_cast<std::size_t>(symbol) - 1) / static_cast<std::size_t>(symbol));
      source = synthesize_data_interference(layout, frames, 1.0, rng);
    } else {
      std::vector<int> active;
      for (const auto& pair : layout.group_map()) {
        active.push_back(pair[std::uniform_int_distribution<int>(0, 1)(rng)]);
      }
      std::sort(active.begin(), active.end());
      source = synthesize_tag(build_tag_spectrum({active}, layout, 1.0, rng), layout);
    }
    if (source.samples.size() > span) source.samples.resize(span);
    const double gain = gain_for_sir(frame, source, inter.offset, inter.sir_db);
    const MixInput parts[] = {{&frame, 0, 1.0}, {&source, inter.offset, gain}};
    frame = mix(parts);
  }

  if (spec.snr_db) {
    frame = apply_awgn(std::move(frame), noise_power_for_snr(*spec.snr_db, per_thin_power, layout),
                       rng);
  }
  return frame;
}

}  // namespace tagspot
