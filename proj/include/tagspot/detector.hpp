#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tagspot/codebook.hpp"
#include "tagspot/layout.hpp"
#include "tagspot/waveform.hpp"

namespace tagspot {

/// Which wide carriers form the denominator of the tag strength.
///   all_carriers: every wide carrier, nulls included (the detector's ratio).
///   non_null:     only the non-null carriers (the convention of the
///                 closed-form analysis, where the ratio is C_t versus the
///                 remaining non-null carriers).
enum class Denominator { all_carriers, non_null };

Denominator parse_denominator(std::string_view name);
std::string_view to_string(Denominator d);

struct DetectorConfig {
  double gamma = 0.62;
  CarrierLayout layout = CarrierLayout::reference();
  /// Intervals whose power over the tracked noise floor is at or below this
  /// are skipped without a transform. Unset disables carrier sense.
  std::optional<double> carrier_sense_snr_db = -1.0;
  /// Fraction of the band, centred on DC, where the centre of mass must lie.
  double com_band = 0.25;
  double noise_smoothing = 0.05;
  /// Starting noise estimate; the first interval's power when unset.
  std::optional<double> initial_noise_power;
  Denominator denominator = Denominator::all_carriers;
  /// Also report candidates that fail the centre-of-mass test.
  bool emit_off_band = false;

  void validate() const;
};

struct DetectionEvent {
  std::size_t interval_start = 0;
  int codeword_index = -1;
  double strength = 0.0;
  double com_position = 0.0;
  bool com_valid = false;
  double snr_estimate_db = 0.0;
};

struct SpotSummary {
  std::size_t windows_total = 0;
  std::size_t windows_analyzed = 0;
  std::size_t windows_gated = 0;
  std::size_t candidates = 0;
  double final_noise_estimate = 0.0;
};

struct SpotResult {
  std::vector<DetectionEvent> events;
  SpotSummary summary;
};

/// Wide-carrier powers: sum of |bin|^2 over each wide carrier's thin bins.
std::vector<double> fold_spectrum(std::span<const cplx> bins, const CarrierLayout& layout);

/// In-mask power over total power (all wide carriers).
double tag_strength(std::span<const double> wide_powers, const WideCarrierMask& mask);

/// Same ratio with a chosen denominator.
double tag_strength(std::span<const double> wide_powers, const WideCarrierMask& mask,
                    const CarrierLayout& layout, Denominator denominator);

struct CenterOfMass {
  double position = 0.0;
  bool valid = false;
};

/// Power-weighted mean of wide-carrier indices centred on zero (so the top
/// carrier sits at +(wide_total - 1) / 2). Valid when |position| is at most
/// wide_total * band / 2.
CenterOfMass center_of_mass(std::span<const double> wide_powers, const CarrierLayout& layout,
                            double band = 0.25);

/// Exponential moving average step.
double noise_tracker_update(double current, double interval_power, double smoothing);

/// Sliding-window tag spotter for one codebook. Windows are fft_size long
/// and start every cp_length samples, so any tag lying wholly inside the
/// stream covers at least one window completely.
class Spotter {
 public:
  Spotter(const Codebook& codebook, DetectorConfig config);

  const DetectorConfig& config() const { return config_; }
  std::size_t codeword_count() const { return masks_.size(); }

  /// Tag strength of every codeword for one window of wide powers.
  std::vector<double> strengths(std::span<const double> wide_powers) const;

  /// Best codeword (lowest index on ties) and its strength.
  std::pair<int, double> best(std::span<const double> wide_powers) const;

  SpotResult spot(const IqFrame& samples) const;

 private:
  DetectorConfig config_;
  std::vector<WideCarrierMask> masks_;
  std::vector<char> counted_;
};

SpotResult spot(const IqFrame& samples, const Codebook& codebook, const DetectorConfig& config);

}  // namespace tagspot
