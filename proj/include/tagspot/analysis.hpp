#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tagspot/channel.hpp"
#include "tagspot/codebook.hpp"
#include "tagspot/detector.hpp"
#include "tagspot/layout.hpp"
#include "tagspot/monte_carlo.hpp"

namespace tagspot {

// ---------------------------------------------------------------------------
// Spectral leakage
// ---------------------------------------------------------------------------

/// Power a unit carrier leaks into a bin k positions away under a fractional
/// offset delta: sinc^2(pi (k + delta)), equal to 1 at k + delta = 0.
double leakage_single(int k, double delta);

/// Bound on the power leaked into position 0 by an infinite block of
/// independent carriers starting at position k >= 1: sum_{c >= k} 1 / c^2.
double leakage_block(int k);

/// Expected fraction of tag power landing in wide carriers that the tag does
/// not use, for a frequency offset uniform on (0, max_offset] thin carriers.
/// Leakage follows leakage_single on the circular thin-carrier grid and the
/// expectation is exact over uniformly random codeword bits.
double expected_offset_leak(double max_offset, const CarrierLayout& layout);

// ---------------------------------------------------------------------------
// Single-tag detection
// ---------------------------------------------------------------------------

struct AnalysisModel {
  CarrierLayout layout = CarrierLayout::reference();
  double snr_db = 0.0;
  Fading fading = Fading::wideband;
  double gamma = 0.62;
  Denominator denominator = Denominator::non_null;
};

/// Degrees of freedom (real components) of the noise-only denominator sum.
int denominator_dof(const CarrierLayout& layout, Denominator denominator);

/// SNR (dB, thick-carrier definition) at which the expected tag strength
/// equals gamma when noise adds the same power to every thin bin.
double naive_threshold_snr_db(double gamma, const CarrierLayout& layout,
                              Denominator denominator = Denominator::all_carriers);

/// Noise-only probability that a single tag's strength exceeds gamma:
/// an F-distribution tail, evaluated as the Beta(alpha c, d_R / 2) upper tail.
double pf_single(double gamma, const CarrierLayout& layout,
                 Denominator denominator = Denominator::non_null);

/// Probability that the transmitted tag's strength exceeds gamma under the
/// wideband (Rayleigh) or narrowband (constant amplitude) model. Fading::none
/// is treated as narrowband. Evaluated by one-dimensional adaptive quadrature.
double pd_single(const AnalysisModel& model);

// ---------------------------------------------------------------------------
// Families of tags (Monte Carlo)
// ---------------------------------------------------------------------------

/// Noise-only wide-carrier powers for one trial, in units of the per-bin
/// noise power. Shared by the family and pairs estimators so that equal
/// seeds give paired draws.
std::vector<double> noise_wide_powers(const CarrierLayout& layout, Rng& rng);

/// P(max over codewords of tag strength > gamma) on noise only.
Estimate pf_family_mc(double gamma, const Codebook& codebook, const CarrierLayout& layout,
                      std::size_t trials, std::uint64_t seed,
                      Denominator denominator = Denominator::non_null);

/// Same for the unencoded family of all 2^groups words, where the maximum is
/// taken group by group; upper bound for every codebook over this layout.
Estimate pf_pairs_bound(double gamma, const CarrierLayout& layout, std::size_t trials,
                        std::uint64_t seed, Denominator denominator = Denominator::non_null);

/// Probability that the strongest codeword (no threshold) is not the one
/// transmitted, on the thin-carrier model channel.
Estimate pm_mc(double snr_db, const Codebook& codebook, const CarrierLayout& layout,
               Fading fading, std::size_t trials, std::uint64_t seed);

/// Misclassification for the unencoded family (group-by-group decisions).
Estimate pm_mc_full_code(double snr_db, const CarrierLayout& layout, Fading fading,
                         std::size_t trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Design calculators
// ---------------------------------------------------------------------------

struct SweepPoint {
  int active = 0;
  double gamma0 = 0.0;
  /// False-alarm probability at gamma0.
  double pf = 0.0;
  /// Monte Carlo detection probability at gamma0 (should sit near 1/2).
  Estimate pd_check;
};

/// Active-carrier sweep of the simplified model (all thin carriers of an
/// active wide carrier used). For each q in [1, total - 1], gamma0 makes the
/// wideband detection probability 1/2 at `snr_db`; pf is the noise-only
/// tail at gamma0. `trials` = 0 skips the Monte Carlo check.
std::vector<SweepPoint> sweep_active_carriers(int total, double snr_db, int thin_per_wide,
                                              std::size_t trials, std::uint64_t seed);

/// Range ratio for an SNR margin under p ~ 1 / r^exponent.
double range_gain(double snr_gap_db, double path_loss_exponent);

/// Frame accounting of a tagged packet.
struct FrameAccounting {
  /// 48 data carriers x 16-QAM x rate 1/2.
  int payload_bits_per_frame = 96;
  int sync_frames = 6;
  int tag_frames = 8;
};

int payload_frames(double payload_bytes, const FrameAccounting& accounting = {});

/// Tag duration over untagged packet duration.
double overhead(double payload_bytes, const FrameAccounting& accounting = {});

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

struct RocPoint {
  double gamma = 0.0;
  double pd = 0.0;
  double pf = 0.0;
  double pf_ci95 = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

/// Closed-form single-tag curve over a gamma grid.
RocCurve roc_single(AnalysisModel model, const std::vector<double>& gammas);

/// pd from the closed form (unchanged for families), pf by Monte Carlo over
/// the codebook; with `codebook` null the unencoded (pairs) family is used.
RocCurve roc_family(AnalysisModel model, const Codebook* codebook,
                    const std::vector<double>& gammas, std::size_t trials, std::uint64_t seed);

}  // namespace tagspot
