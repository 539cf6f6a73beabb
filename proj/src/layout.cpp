#include "tagspot/layout.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "tagspot/error.hpp"

namespace tagspot {

void CarrierLayout::validate() const {
  if (thin_per_wide <= 0 || wide_total <= 0 || fft_size <= 0) {
    throw ValidationError("layout: carrier counts must be positive");
  }
  if (wide_total * thin_per_wide != fft_size) {
    throw ValidationError("layout: wide_total * thin_per_wide must equal fft_size");
  }
  if (active_thin_per_wide <= 0 || active_thin_per_wide > thin_per_wide) {
    throw ValidationError("layout: need 0 < active_thin_per_wide <= thin_per_wide");
  }
  std::set<int> nulls(null_wide.begin(), null_wide.end());
  if (nulls.size() != null_wide.size()) {
    throw ValidationError("layout: duplicate null carrier");
  }
  for (int w : nulls) {
    if (w < 0 || w >= wide_total) {
      throw ValidationError("layout: null carrier " + std::to_string(w) + " out of range");
    }
  }
  if (2 * groups + static_cast<int>(nulls.size()) != wide_total) {
    throw ValidationError("layout: 2 * groups + nulls must equal wide_total");
  }
  if (!(cp_fraction >= 0.0 && cp_fraction < 1.0)) {
    throw ValidationError("layout: cp_fraction must lie in [0, 1)");
  }
  const double cp = fft_size * cp_fraction;
  if (std::abs(cp - std::round(cp)) > 1e-9) {
    throw ValidationError("layout: cyclic prefix must be a whole number of samples");
  }
}

int CarrierLayout::cp_length() const {
  return static_cast<int>(std::lround(fft_size * cp_fraction));
}

bool CarrierLayout::is_null(int wide) const {
  return std::find(null_wide.begin(), null_wide.end(), wide) != null_wide.end();
}

std::vector<int> CarrierLayout::non_null() const {
  std::vector<int> out;
  out.reserve(wide_total);
  for (int w = 0; w < wide_total; ++w) {
    if (!is_null(w)) out.push_back(w);
  }
  return out;
}

std::vector<std::array<int, 2>> CarrierLayout::group_map() const {
  const auto carriers = non_null();
  std::vector<std::array<int, 2>> pairs;
  pairs.reserve(carriers.size() / 2);
  for (std::size_t i = 0; i + 1 < carriers.size(); i += 2) {
    pairs.push_back({carriers[i], carriers[i + 1]});
  }
  return pairs;
}

int CarrierLayout::thin_bin(int wide, int offset) const {
  const int freq = (wide - wide_total / 2) * thin_per_wide - thin_per_wide / 2 + offset;
  return ((freq % fft_size) + fft_size) % fft_size;
}

bool WideCarrierMask::contains(int wide) const {
  return std::binary_search(active.begin(), active.end(), wide);
}

void validate_mask(const WideCarrierMask& mask, const CarrierLayout& layout) {
  if (static_cast<int>(mask.active.size()) != layout.groups) {
    throw ValidationError("mask: expected " + std::to_string(layout.groups) +
                          " active carriers, got " + std::to_string(mask.active.size()));
  }
  if (!std::is_sorted(mask.active.begin(), mask.active.end())) {
    throw ValidationError("mask: active carriers must be sorted");
  }
  for (const auto& [first, second] : layout.group_map()) {
    if (mask.contains(first) == mask.contains(second)) {
      throw ValidationError("mask: group (" + std::to_string(first) + ", " +
                            std::to_string(second) + ") must have exactly one active carrier");
    }
  }
}

}  // namespace tagspot
