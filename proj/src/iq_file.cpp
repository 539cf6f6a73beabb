#include "tagspot/iq_file.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "tagspot/error.hpp"

namespace tagspot {

namespace {

void put_f32(std::string& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFU));
}

float get_f32(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

nlohmann::json layout_to_json(const CarrierLayout& layout) {
  return {{"thin_per_wide", layout.thin_per_wide},
          {"active_thin_per_wide", layout.active_thin_per_wide},
          {"groups", layout.groups},
          {"wide_total", layout.wide_total},
          {"null_wide", layout.null_wide},
          {"fft_size", layout.fft_size},
          {"cp_fraction", layout.cp_fraction}};
}

CarrierLayout layout_from_json(const nlohmann::json& doc) {
  CarrierLayout layout;
  try {
    layout.thin_per_wide = doc.value("thin_per_wide", layout.thin_per_wide);
    layout.active_thin_per_wide = doc.value("active_thin_per_wide", layout.active_thin_per_wide);
    layout.groups = doc.value("groups", layout.groups);
    layout.wide_total = doc.value("wide_total", layout.wide_total);
    layout.null_wide = doc.value("null_wide", layout.null_wide);
    layout.fft_size = doc.value("fft_size", layout.fft_size);
    layout.cp_fraction = doc.value("cp_fraction", layout.cp_fraction);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("layout: ") + e.what());
  }
  layout.validate();
  return layout;
}

std::filesystem::path sidecar_path(const std::filesystem::path& iq_path) {
  auto p = iq_path;
  p += ".json";
  return p;
}

void write_iq_file(const std::filesystem::path& path, const IqFrame& frame,
                   const IqMetadata& meta) {
  std::string bytes;
  bytes.reserve(frame.samples.size() * 8);
  for (const cplx& s : frame.samples) {
    put_f32(bytes, static_cast<float>(s.real()));
    put_f32(bytes, static_cast<float>(s.imag()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());

  nlohmann::json doc = {{"format", "cf32le"},
                        {"sample_rate", meta.sample_rate},
                        {"samples", frame.samples.size()},
                        {"layout", layout_to_json(meta.layout)},
                        {"extra", meta.extra}};
  std::ofstream side(sidecar_path(path), std::ios::trunc);
  if (!side) throw IoError("cannot write " + sidecar_path(path).string());
  side << doc.dump(2) << '\n';
  if (!side) throw IoError("write failed: " + sidecar_path(path).string());
}

IqFile read_iq_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0) throw IoError("truncated IQ file " + path.string());

  IqFile file;
  file.frame.samples.reserve(bytes.size() / 8);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < bytes.size(); i += 8) {
    file.frame.samples.emplace_back(get_f32(p + i), get_f32(p + i + 4));
  }

  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    std::ifstream meta_in(side);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(meta_in);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("bad sidecar " + side.string() + ": " + e.what());
    }
    file.meta.sample_rate = doc.value("sample_rate", file.meta.sample_rate);
    if (doc.contains("layout")) file.meta.layout = layout_from_json(doc["layout"]);
    if (doc.contains("extra")) file.meta.extra = doc["extra"];
  }
  file.frame.sample_rate = file.meta.sample_rate;
  return file;
}

}  // namespace tagspot
