#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "tagspot/layout.hpp"
#include "tagspot/rng.hpp"
#include "tagspot/waveform.hpp"

namespace tagspot {

/// none: identity. narrowband: one unit-modulus gain with uniform phase.
/// wideband: independent CN(0, 1) gain per thin carrier.
enum class Fading { none, narrowband, wideband };

Fading parse_fading(std::string_view name);
std::string_view to_string(Fading fading);

struct InterferenceSpec {
  enum class Kind { data, tag };
  Kind kind = Kind::data;
  /// Signal to interference ratio over the overlapping time support.
  double sir_db = 0.0;
  std::size_t offset = 0;
};

struct ChannelSpec {
  /// Thick-carrier SNR, beta p / (alpha n). No noise when unset.
  std::optional<double> snr_db;
  /// Frequency offset in thin-carrier widths.
  double cfo = 0.0;
  Fading fading = Fading::none;
  std::optional<InterferenceSpec> interference;
  double max_abs_cfo = 2.0;

  void validate() const;
};

/// Per-thin-carrier noise power n solving snr = beta p / (alpha n).
double noise_power_for_snr(double snr_db, double per_thin_power, const CarrierLayout& layout);

/// Adds CN(0, n) to every sample; under the unitary DFT every bin then gains
/// noise power n on average.
IqFrame apply_awgn(IqFrame frame, double noise_power, Rng& rng);

/// Sample k is multiplied by exp(2 pi i cfo k / fft_size).
IqFrame apply_cfo(IqFrame frame, double cfo, const CarrierLayout& layout);

TagSpectrum apply_fading(TagSpectrum spectrum, Fading fading, Rng& rng);

/// Frame version. Wideband fading works block by block on tag symbols
/// (cyclic prefix + fft_size body): the body is transformed, every bin gets
/// its own gain, and the prefix is rebuilt. The frame length must then be a
/// multiple of the tag symbol length.
IqFrame apply_fading(IqFrame frame, Fading fading, const CarrierLayout& layout, Rng& rng);

struct MixInput {
  const IqFrame* frame = nullptr;
  std::size_t offset = 0;
  double gain = 1.0;
};

/// Sum of gain-scaled, offset-shifted frames, zero padded to the longest
/// extent. The output takes the first input's sample rate.
IqFrame mix(std::span<const MixInput> inputs);

/// Amplitude gain for `interferer` (placed at `offset` relative to `signal`)
/// so that the power ratio over the overlap equals `sir_db`.
double gain_for_sir(const IqFrame& signal, const IqFrame& interferer, std::size_t offset,
                    double sir_db);

/// Full channel in fixed order: fading, frequency offset, interference,
/// noise. `per_thin_power` is the tag's power per active thin carrier and
/// anchors the SNR definition.
IqFrame impair(const IqFrame& input, const ChannelSpec& spec, double per_thin_power,
               const CarrierLayout& layout, Rng& rng);

}  // namespace tagspot
