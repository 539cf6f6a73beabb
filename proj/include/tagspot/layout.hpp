#pragma once

#include <array>
#include <vector>

namespace tagspot {

/// Geometry of the tag signal: `wide_total` wide carriers, each made of
/// `thin_per_wide` thin carriers of which the central `active_thin_per_wide`
/// carry power. Non-null wide carriers form `groups` two-carrier groups.
///
/// Wide carriers are indexed 0..wide_total-1 in ascending frequency order, so
/// index wide_total/2 is the carrier centred on DC. Wide carrier w is centred
/// on the frequency of payload subcarrier (w - wide_total/2) of a
/// wide_total-point OFDM grid and spans thin offsets 0..thin_per_wide-1
/// around it. Thin carriers are addressed either by (wide, offset) or by
/// their natural FFT bin.
struct CarrierLayout {
  int thin_per_wide = 8;
  int active_thin_per_wide = 4;
  int groups = 28;
  int wide_total = 64;
  std::vector<int> null_wide = {0, 1, 2, 32, 60, 61, 62, 63};
  int fft_size = 512;
  double cp_fraction = 0.25;

  static CarrierLayout reference() { return {}; }

  /// Throws ValidationError when the geometry is inconsistent.
  void validate() const;

  int cp_length() const;
  int frame_length() const { return fft_size + cp_length(); }
  int first_active_offset() const { return (thin_per_wide - active_thin_per_wide) / 2; }
  int active_thin_total() const { return active_thin_per_wide * groups; }

  bool is_null(int wide) const;
  std::vector<int> non_null() const;

  /// Non-null carriers paired as neighbours in ascending frequency order.
  std::vector<std::array<int, 2>> group_map() const;

  /// Natural-order FFT bin of thin carrier `offset` inside wide carrier `wide`.
  int thin_bin(int wide, int offset) const;

  bool operator==(const CarrierLayout&) const = default;
};

/// Wide carriers lit by one tag, sorted ascending.
struct WideCarrierMask {
  std::vector<int> active;

  bool contains(int wide) const;
  bool operator==(const WideCarrierMask&) const = default;
};

/// Throws ValidationError unless the mask has one active carrier per group
/// and avoids every null carrier.
void validate_mask(const WideCarrierMask& mask, const CarrierLayout& layout);

}  // namespace tagspot
