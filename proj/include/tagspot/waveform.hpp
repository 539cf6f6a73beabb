#pragma once

#include <cstddef>
#include <vector>

#include "tagspot/layout.hpp"
#include "tagspot/rng.hpp"

namespace tagspot {

/// Complex baseband samples. `sample_rate` is metadata only.
struct IqFrame {
  std::vector<cplx> samples;
  double sample_rate = 1.0e6;

  std::size_t size() const { return samples.size(); }
};

/// Throws ValidationError on an empty frame or non-finite samples.
void validate(const IqFrame& frame);

/// Mean |x|^2 over [begin, end).
double mean_power(const IqFrame& frame, std::size_t begin = 0, std::size_t end = SIZE_MAX);

/// Per-thin-carrier amplitudes in natural FFT order (length fft_size).
struct TagSpectrum {
  std::vector<cplx> amplitudes;

  double total_power() const;
};

/// Equal-magnitude, independently uniform-phase symbols on the central
/// active thin carriers of every wide carrier in `mask`. The spectral power
/// sum_k |X_k|^2 equals `total_power`.
TagSpectrum build_tag_spectrum(const WideCarrierMask& mask, const CarrierLayout& layout,
                               double total_power, Rng& rng);

/// Inverse unitary DFT of the spectrum with the cyclic prefix prepended.
IqFrame synthesize_tag(const TagSpectrum& spectrum, const CarrierLayout& layout);

/// 10 log10(peak / mean) of |x|^2. Throws on an all-zero frame.
double papr_db(const IqFrame& frame);

struct PaprLimitedTag {
  IqFrame frame;
  TagSpectrum spectrum;
  double papr_db = 0.0;
  int attempts = 0;
  /// False when max_attempts ran out; `frame` is then the lowest-PAPR draw.
  bool cap_met = false;
};

/// Redraws the random phases until the PAPR is at most `papr_cap_db`.
PaprLimitedTag synthesize_tag_papr_limited(const WideCarrierMask& mask, const CarrierLayout& layout,
                                           double total_power, double papr_cap_db, Rng& rng,
                                           int max_attempts);

/// Centered indices (-26..26, without 0, +-7, +-21) of the occupied carriers
/// of the payload-like interferer, on a 64-point grid.
std::vector<int> data_subcarriers();

/// Back-to-back OFDM-like data frames: 64-point body plus cyclic prefix,
/// unit-modulus QPSK symbols on the 48 data subcarriers. `total_power` is the
/// spectral power of each frame body, so mean sample power is total_power / 64.
IqFrame synthesize_data_interference(const CarrierLayout& layout, int n_frames,
                                     double total_power, Rng& rng);

}  // namespace tagspot
