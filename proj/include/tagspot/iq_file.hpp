#pragma once

#include <filesystem>

#include <json.hpp>

#include "tagspot/layout.hpp"
#include "tagspot/waveform.hpp"

namespace tagspot {

/// Sidecar document stored next to an IQ file as `<file>.json`.
struct IqMetadata {
  double sample_rate = 1.0e6;
  CarrierLayout layout = CarrierLayout::reference();
  /// Free-form provenance (codeword, power, channel settings, seed, ...).
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json layout_to_json(const CarrierLayout& layout);
CarrierLayout layout_from_json(const nlohmann::json& doc);

std::filesystem::path sidecar_path(const std::filesystem::path& iq_path);

/// Samples as little-endian float32 pairs (I, Q). Samples are rounded to
/// float32 on write, so write(read(file)) reproduces a file bit for bit.
void write_iq_file(const std::filesystem::path& path, const IqFrame& frame,
                   const IqMetadata& meta);

struct IqFile {
  IqFrame frame;
  IqMetadata meta;
};

/// Reads samples and, when present, the sidecar. Throws IoError on missing
/// or truncated files.
IqFile read_iq_file(const std::filesystem::path& path);

}  // namespace tagspot
