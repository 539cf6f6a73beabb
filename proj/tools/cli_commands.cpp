#include "cli_commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tagspot/analysis.hpp"
#include "tagspot/channel.hpp"
#include "tagspot/codebook.hpp"
#include "tagspot/detector.hpp"
#include "tagspot/error.hpp"
#include "tagspot/iq_file.hpp"
#include "tagspot/monte_carlo.hpp"
#include "tagspot/waveform.hpp"

namespace tagspot::cli {
namespace {

using nlohmann::json;

constexpr int kConfigVersion = 1;

// ---------------------------------------------------------------------------
// Parameters: defaults, then the config document, then explicit flags.
// ---------------------------------------------------------------------------

enum class Kind { integer, seed, real, optional_real, text, boolean, real_list, text_list };

struct Param {
  std::string key;
  Kind kind;
  json fallback;
  CLI::Option* option = nullptr;
  std::string raw;
};

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10g", value);
  return buffer;
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::logic_error&) {
    throw ValidationError("--" + key + ": not a number: '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

// "a,b,c" or an inclusive range "start:stop:step".
json parse_real_list(const std::string& key, const std::string& text) {
  json out = json::array();
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ValidationError("--" + key + ": range must be start:stop:step");
    const double start = parse_real(key, parts[0]);
    const double stop = parse_real(key, parts[1]);
    const double step = parse_real(key, parts[2]);
    if (!(step > 0.0) || stop < start) throw ValidationError("--" + key + ": empty or invalid range");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  for (const auto& part : split(text, ',')) out.push_back(parse_real(key, part));
  if (out.empty()) throw ValidationError("--" + key + ": empty list");
  return out;
}

json convert(const Param& p, const json& value) {
  const auto bad = [&] { return ValidationError("parameter '" + p.key + "' has the wrong type"); };
  if (value.is_string() && p.kind != Kind::text) {
    const std::string text = value.get<std::string>();
    switch (p.kind) {
      case Kind::integer: {
        const double v = parse_real(p.key, text);
        if (v != std::floor(v)) throw bad();
        return static_cast<long long>(v);
      }
      case Kind::seed:
        try {
          std::size_t used = 0;
          const auto v = std::stoull(text, &used, 0);
          if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
          return v;
        } catch (const std::logic_error&) {
          throw ValidationError("--seed: not an unsigned integer: '" + text + "'");
        }
      case Kind::real: return parse_real(p.key, text);
      case Kind::optional_real:
        if (text == "off" || text == "none") return nullptr;
        return parse_real(p.key, text);
      case Kind::boolean:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        throw bad();
      case Kind::real_list: return parse_real_list(p.key, text);
      case Kind::text_list: {
        json out = json::array();
        for (const auto& part : split(text, ',')) out.push_back(part);
        if (out.empty()) throw bad();
        return out;
      }
      case Kind::text: break;
    }
  }
  switch (p.kind) {
    case Kind::integer:
      if (value.is_number_integer()) return value;
      if (value.is_number_float() && value.get<double>() == std::floor(value.get<double>())) {
        return static_cast<long long>(value.get<double>());
      }
      throw bad();
    case Kind::seed:
      if (value.is_number_unsigned() || (value.is_number_integer() && value.get<long long>() >= 0)) {
        return value.get<std::uint64_t>();
      }
      throw bad();
    case Kind::real:
      if (value.is_number()) return value.get<double>();
      throw bad();
    case Kind::optional_real:
      if (value.is_null()) return value;
      if (value.is_number()) return value.get<double>();
      throw bad();
    case Kind::text:
      if (value.is_string()) return value;
      throw bad();
    case Kind::boolean:
      if (value.is_boolean()) return value;
      throw bad();
    case Kind::real_list:
      if (value.is_number()) return json::array({value.get<double>()});
      if (value.is_array() && !value.empty()) {
        json out = json::array();
        for (const auto& v : value) {
          if (!v.is_number()) throw bad();
          out.push_back(v.get<double>());
        }
        return out;
      }
      throw bad();
    case Kind::text_list:
      if (value.is_array() && !value.empty()) {
        for (const auto& v : value) {
          if (!v.is_string()) throw bad();
        }
        return value;
      }
      throw bad();
  }
  throw bad();
}

class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& description)
      : name_(name), app_(parent.add_subcommand(name, description)) {
    app_->add_option("--config", config_path_, "JSON config document (flags override it)");
  }

  Command& add(const std::string& key, Kind kind, json fallback, const std::string& help) {
    auto param = std::make_unique<Param>(Param{key, kind, std::move(fallback)});
    std::string flag = "--" + key;
    for (auto& c : flag) {
      if (c == '_') c = '-';
    }
    if (kind == Kind::boolean) {
      param->option = app_->add_flag(flag, help);
    } else {
      param->option = app_->add_option(flag, param->raw, help);
    }
    params_.push_back(std::move(param));
    return *this;
  }

  CLI::App* app() const { return app_; }
  const std::string& name() const { return name_; }

  /// Merged parameter set. Unknown document keys are rejected.
  json resolve() const {
    json merged = json::object();
    for (const auto& p : params_) merged[p->key] = p->fallback;
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      if (!in) throw IoError("cannot open config '" + config_path_ + "'");
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ValidationError("config '" + config_path_ + "': " + e.what());
      }
      if (!doc.is_object()) throw ValidationError("config must be a JSON object");
      if (!doc.contains("version") || doc["version"] != kConfigVersion) {
        throw ValidationError("config must declare \"version\": " + std::to_string(kConfigVersion));
      }
      for (const auto& [key, value] : doc.items()) {
        if (key == "version") continue;
        if (key == "command") {
          if (value != name_) throw ValidationError("config is for command '" + value.dump() + "'");
          continue;
        }
        const Param* p = find(key);
        if (p == nullptr) throw ValidationError("config: unknown parameter '" + key + "' for " + name_);
        merged[key] = convert(*p, value);
      }
    }
    for (const auto& p : params_) {
      if (p->option->count() == 0) continue;
      merged[p->key] = p->kind == Kind::boolean ? json(true) : convert(*p, json(p->raw));
    }
    return merged;
  }

 private:
  const Param* find(const std::string& key) const {
    for (const auto& p : params_) {
      if (p->key == key) return p.get();
    }
    return nullptr;
  }

  std::string name_;
  CLI::App* app_;
  std::string config_path_;
  std::vector<std::unique_ptr<Param>> params_;
};

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

std::uint64_t require_seed(const json& params) {
  if (params["seed"].is_null()) throw ValidationError("this run is stochastic: --seed is required");
  return params["seed"].get<std::uint64_t>();
}

std::size_t positive_count(const json& params, const std::string& key) {
  const auto v = params[key].get<long long>();
  if (v <= 0) throw ValidationError("--" + key + " must be positive");
  return static_cast<std::size_t>(v);
}

Codebook resolve_codebook(const std::string& source) {
  if (source == "builtin") return conference_matrix_code(29, 2);
  return load_codebook_file(source);
}

/// Output sink: a file, or stdout for "-" or empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw IoError("cannot write '" + path + "'");
    }
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void finish() {
    out().flush();
    if (!out()) throw IoError("write failed");
  }

 private:
  std::ofstream file_;
};

void write_header(std::ostream& out, const std::string& command, const json& params) {
  out << "# tagspot " << command << "\n";
  out << "# config: " << params.dump() << "\n";
  out << "# seed: " << (params.contains("seed") ? params["seed"].dump() : "none") << "\n";
}

std::vector<double> reals(const json& list) { return list.get<std::vector<double>>(); }

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_modulate(const json& params) {
  const std::uint64_t seed = require_seed(params);
  const std::string out_path = params["out"].get<std::string>();
  if (out_path.empty() || out_path == "-") throw ValidationError("modulate needs --out <file>");
  const Codebook book = resolve_codebook(params["codebook"].get<std::string>());
  const CarrierLayout layout = CarrierLayout::reference();
  const double power = params["power"].get<double>();
  if (!(power >= 0.0) || !std::isfinite(power)) throw ValidationError("--power must be finite and >= 0");

  Rng rng(seed);
  long long index = params["index"].get<long long>();
  if (index < 0) {
    index = std::uniform_int_distribution<long long>(0, static_cast<long long>(book.size()) - 1)(rng);
  }
  if (index >= static_cast<long long>(book.size())) {
    throw ValidationError("--index " + std::to_string(index) + " out of range for a codebook of " +
                          std::to_string(book.size()) + " words");
  }
  const Codeword word = book[static_cast<std::size_t>(index)];
  const WideCarrierMask mask = codeword_to_mask(word, book.word_length(), layout);

  IqFrame frame;
  bool cap_met = true;
  int attempts = 1;
  const json cap = params["papr_cap"];
  if (cap.is_null()) {
    frame = synthesize_tag(build_tag_spectrum(mask, layout, power, rng), layout);
  } else {
    const auto limited = synthesize_tag_papr_limited(mask, layout, power, cap.get<double>(), rng,
                                                     static_cast<int>(params["papr_attempts"].get<long long>()));
    frame = limited.frame;
    cap_met = limited.cap_met;
    attempts = limited.attempts;
  }
  frame.sample_rate = params["sample_rate"].get<double>();
  validate(frame);

  const double papr = power > 0.0 ? papr_db(frame) : 0.0;
  IqMetadata meta;
  meta.sample_rate = frame.sample_rate;
  meta.layout = layout;
  meta.extra = {{"command", "modulate"},
                {"config", params},
                {"codebook", book.name()},
                {"codeword_index", index},
                {"codeword", to_bit_string(word, book.word_length())},
                {"total_power", power},
                {"per_thin_power", power / layout.active_thin_total()},
                {"papr_db", papr},
                {"papr_cap_met", cap_met}};
  write_iq_file(out_path, frame, meta);

  std::cout << "codeword_index " << index << "\n"
            << "codeword " << to_bit_string(word, book.word_length()) << "\n"
            << "papr_db " << format_number(papr) << "\n"
            << "power " << format_number(mean_power(frame, layout.cp_length()) * layout.fft_size) << "\n"
            << "papr_attempts " << attempts << "\n"
            << "papr_cap_met " << (cap_met ? "true" : "false") << "\n";
  return 0;
}

int cmd_impair(const json& params) {
  const std::string in_path = params["in"].get<std::string>();
  const std::string out_path = params["out"].get<std::string>();
  if (in_path.empty()) throw ValidationError("impair needs --in <file>");
  if (out_path.empty() || out_path == "-") throw ValidationError("impair needs --out <file>");
  IqFile input = read_iq_file(in_path);
  const CarrierLayout& layout = input.meta.layout;

  ChannelSpec spec;
  if (!params["snr"].is_null()) spec.snr_db = params["snr"].get<double>();
  spec.cfo = params["cfo"].get<double>();
  spec.fading = parse_fading(params["fading"].get<std::string>());
  const std::string kind = params["interference"].get<std::string>();
  if (kind == "data" || kind == "tag") {
    InterferenceSpec inter;
    inter.kind = kind == "data" ? InterferenceSpec::Kind::data : InterferenceSpec::Kind::tag;
    inter.sir_db = params["sir"].get<double>();
    const auto offset = params["interference_offset"].get<long long>();
    if (offset < 0) throw ValidationError("--interference-offset must be >= 0");
    inter.offset = static_cast<std::size_t>(offset);
    spec.interference = inter;
  } else if (kind != "none") {
    throw ValidationError("--interference must be none, data or tag");
  }
  spec.validate();

  const json noise_power = params["noise_power"];
  if (spec.snr_db && !noise_power.is_null()) {
    throw ValidationError("--snr and --noise-power are exclusive");
  }
  if (!noise_power.is_null() && !(noise_power.get<double>() >= 0.0)) {
    throw ValidationError("--noise-power must be >= 0");
  }
  const double scale = params["scale"].get<double>();
  const auto pad_before = params["pad_before"].get<long long>();
  const auto pad_after = params["pad_after"].get<long long>();
  if (pad_before < 0 || pad_after < 0) throw ValidationError("padding must be >= 0");
  if (!std::isfinite(scale)) throw ValidationError("--scale must be finite");

  double per_thin = std::numeric_limits<double>::quiet_NaN();
  if (!params["power"].is_null()) {
    per_thin = params["power"].get<double>();
  } else if (input.meta.extra.contains("per_thin_power")) {
    per_thin = input.meta.extra["per_thin_power"].get<double>();
  }
  per_thin *= scale * scale;
  if (spec.snr_db && !(per_thin > 0.0)) {
    throw ValidationError("--snr needs a positive per-thin tag power (--power or the input sidecar)");
  }

  const bool stochastic = spec.snr_db || !noise_power.is_null() || spec.fading != Fading::none ||
                          spec.interference.has_value();
  const std::uint64_t seed = stochastic ? require_seed(params) : 0;
  Rng rng(seed);

  // Fading and offset act on the tag as recorded; padding then places it in
  // the stream, and interference and noise cover the whole stream.
  IqFrame frame = apply_fading(std::move(input.frame), spec.fading, layout, rng);
  frame = apply_cfo(std::move(frame), spec.cfo, layout);
  if (scale != 1.0) {
    for (auto& s : frame.samples) s *= scale;
  }
  if (pad_before > 0 || pad_after > 0) {
    std::vector<cplx> padded(static_cast<std::size_t>(pad_before), cplx{});
    padded.insert(padded.end(), frame.samples.begin(), frame.samples.end());
    padded.resize(padded.size() + static_cast<std::size_t>(pad_after), cplx{});
    frame.samples = std::move(padded);
  }
  ChannelSpec rest = spec;
  rest.fading = Fading::none;
  rest.cfo = 0.0;
  if (rest.snr_db || rest.interference) frame = impair(frame, rest, per_thin, layout, rng);
  if (!noise_power.is_null()) frame = apply_awgn(std::move(frame), noise_power.get<double>(), rng);

  IqMetadata meta = input.meta;
  json history = meta.extra.contains("impairments") ? meta.extra["impairments"] : json::array();
  history.push_back(params);
  meta.extra["impairments"] = history;
  if (std::isfinite(per_thin)) meta.extra["per_thin_power"] = per_thin;
  if (pad_before > 0) {
    meta.extra["tag_offset"] = meta.extra.value("tag_offset", 0LL) + pad_before;
  }
  write_iq_file(out_path, frame, meta);
  return 0;
}

int cmd_spot(const json& params) {
  const std::string in_path = params["in"].get<std::string>();
  if (in_path.empty()) throw ValidationError("spot needs --in <file>");
  const IqFile input = read_iq_file(in_path);
  const Codebook book = resolve_codebook(params["codebook"].get<std::string>());

  DetectorConfig config;
  config.layout = input.meta.layout;
  config.gamma = params["gamma"].get<double>();
  config.carrier_sense_snr_db = params["carrier_sense"].is_null()
                                    ? std::nullopt
                                    : std::optional<double>(params["carrier_sense"].get<double>());
  config.com_band = params["com_band"].get<double>();
  config.noise_smoothing = params["noise_smoothing"].get<double>();
  if (!params["initial_noise"].is_null()) config.initial_noise_power = params["initial_noise"].get<double>();
  config.denominator = parse_denominator(params["denominator"].get<std::string>());
  config.emit_off_band = params["emit_off_band"].get<bool>();

  const SpotResult result = spot(input.frame, book, config);
  Sink sink(params["out"].get<std::string>());
  for (const auto& e : result.events) {
    const json line = {{"interval_start", e.interval_start},
                       {"time_s", static_cast<double>(e.interval_start) / input.frame.sample_rate},
                       {"codeword_index", e.codeword_index},
                       {"codeword", to_bit_string(book[static_cast<std::size_t>(e.codeword_index)],
                                                  book.word_length())},
                       {"strength", e.strength},
                       {"com_position", e.com_position},
                       {"com_valid", e.com_valid},
                       {"snr_estimate_db", e.snr_estimate_db}};
    sink.out() << line.dump() << "\n";
  }
  sink.finish();
  const auto& s = result.summary;
  const json summary = {{"config", params},
                        {"codebook", book.name()},
                        {"detections", result.events.size()},
                        {"windows_total", s.windows_total},
                        {"windows_analyzed", s.windows_analyzed},
                        {"windows_gated", s.windows_gated},
                        {"candidates", s.candidates},
                        {"final_noise_estimate", s.final_noise_estimate},
                        {"duration_s", static_cast<double>(input.frame.samples.size()) /
                                           input.frame.sample_rate}};
  std::cerr << summary.dump() << "\n";
  return 0;
}

int cmd_curves(const json& params) {
  const auto gammas = reals(params["gamma"]);
  const auto snrs = reals(params["snr"]);
  const auto models = params["models"].get<std::vector<std::string>>();
  const auto families = params["families"].get<std::vector<std::string>>();
  const Denominator denominator = parse_denominator(params["denominator"].get<std::string>());
  const std::size_t trials = positive_count(params, "trials");
  const CarrierLayout layout = CarrierLayout::reference();
  for (const double g : gammas) {
    if (!(g > 0.0 && g < 1.0)) throw ValidationError("--gamma values must lie in (0, 1)");
  }

  bool stochastic = false;
  for (const auto& f : families) {
    if (f != "single" && f != "codebook" && f != "pairs") {
      throw ValidationError("unknown family '" + f + "' (single, codebook, pairs)");
    }
    stochastic = stochastic || f != "single";
  }
  for (const auto& m : models) {
    if (parse_fading(m) == Fading::none) throw ValidationError("models are narrowband or wideband");
  }
  const std::uint64_t seed = stochastic ? require_seed(params) : 0;
  std::optional<Codebook> book;
  for (const auto& f : families) {
    if (f == "codebook") book = resolve_codebook(params["codebook"].get<std::string>());
  }

  Sink sink(params["out"].get<std::string>());
  auto& out = sink.out();
  write_header(out, "curves", params);
  out << "# layout: " << layout_to_json(layout).dump() << "\n";
  for (const auto& model_name : models) {
    const Fading fading = parse_fading(model_name);
    for (const auto& family : families) {
      // pf depends only on gamma; pm only on snr.
      std::vector<Estimate> pf(gammas.size());
      std::vector<double> pf_exact(gammas.size());
      for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (family == "single") {
          pf_exact[i] = pf_single(gammas[i], layout, denominator);
        } else if (family == "codebook") {
          pf[i] = pf_family_mc(gammas[i], *book, layout, trials, seed, denominator);
          pf_exact[i] = pf[i].p();
        } else {
          pf[i] = pf_pairs_bound(gammas[i], layout, trials, seed, denominator);
          pf_exact[i] = pf[i].p();
        }
      }
      out << "\n# model: " << model_name << "\n# family: "
          << (family == "codebook" ? book->name() : family) << "\n";
      out << "# pd: closed form; pf, pm: Monte Carlo unless single; ci: 95% half-width of pf\n";
      out << "gamma snr_db pd pf pm trials ci\n";
      for (const double snr : snrs) {
        Estimate pm;
        if (family == "codebook") pm = pm_mc(snr, *book, layout, fading, trials, seed);
        if (family == "pairs") pm = pm_mc_full_code(snr, layout, fading, trials, seed);
        for (std::size_t i = 0; i < gammas.size(); ++i) {
          AnalysisModel model;
          model.layout = layout;
          model.snr_db = snr;
          model.fading = fading;
          model.gamma = gammas[i];
          model.denominator = denominator;
          out << format_number(gammas[i]) << ' ' << format_number(snr) << ' '
              << format_number(pd_single(model)) << ' ' << format_number(pf_exact[i]) << ' '
              << format_number(pm.p()) << ' ' << (family == "single" ? 0 : trials) << ' '
              << format_number(family == "single" ? 0.0 : pf[i].ci95()) << "\n";
        }
      }
      if (family != "single") {
        std::string flagged;
        for (std::size_t i = 0; i < gammas.size(); ++i) {
          if (pf[i].unreliable()) flagged += " " + format_number(gammas[i]);
        }
        if (!flagged.empty()) out << "# unreliable pf (ci above 20% of the estimate) at gamma:" << flagged << "\n";
      }
    }
  }
  sink.finish();
  return 0;
}

int cmd_leakage(const json& params) {
  const auto k_max = params["k_max"].get<long long>();
  if (k_max < 0) throw ValidationError("--k-max must be >= 0");
  const auto deltas = reals(params["deltas"]);
  const auto max_offsets = reals(params["max_offsets"]);
  Sink sink(params["out"].get<std::string>());
  auto& out = sink.out();
  write_header(out, "leakage", params);
  out << "\n# single-carrier leakage at bin distance k\nk delta leakage\n";
  for (long long k = 0; k <= k_max; ++k) {
    for (const double d : deltas) {
      out << k << ' ' << format_number(d) << ' '
          << format_number(leakage_single(static_cast<int>(k), d)) << "\n";
    }
  }
  out << "\n# leakage of a full block at distance k, summed over offsets\nk leakage_block\n";
  for (long long k = 1; k <= k_max; ++k) {
    out << k << ' ' << format_number(leakage_block(static_cast<int>(k))) << "\n";
  }
  out << "\n# expected fraction leaked outside active carriers, offset uniform on (0, max]\n"
         "max_offset leaked_fraction\n";
  const CarrierLayout layout = CarrierLayout::reference();
  for (const double m : max_offsets) {
    out << format_number(m) << ' ' << format_number(expected_offset_leak(m, layout)) << "\n";
  }
  sink.finish();
  return 0;
}

int cmd_sweep(const json& params) {
  const std::uint64_t seed = require_seed(params);
  const auto total = params["total"].get<long long>();
  const auto alpha = params["alpha"].get<long long>();
  const auto points = sweep_active_carriers(static_cast<int>(total), params["snr"].get<double>(),
                                            static_cast<int>(alpha), positive_count(params, "trials"), seed);
  Sink sink(params["out"].get<std::string>());
  auto& out = sink.out();
  write_header(out, "sweep", params);
  const SweepPoint* best = nullptr;
  out << "active gamma0 pf pd_check ci\n";
  for (const auto& p : points) {
    if (best == nullptr || p.pf < best->pf) best = &p;
    out << p.active << ' ' << format_number(p.gamma0) << ' ' << format_number(p.pf) << ' '
        << format_number(p.pd_check.p()) << ' ' << format_number(p.pd_check.ci95()) << "\n";
  }
  if (best != nullptr) out << "# argmin_active: " << best->active << "\n";
  sink.finish();
  return 0;
}

int cmd_range(const json& params) {
  Sink sink(params["out"].get<std::string>());
  auto& out = sink.out();
  write_header(out, "range", params);
  out << "snr_gap_db exponent range_gain\n";
  for (const double gap : reals(params["gaps"])) {
    for (const double e : reals(params["exponents"])) {
      out << format_number(gap) << ' ' << format_number(e) << ' ' << format_number(range_gain(gap, e))
          << "\n";
    }
  }
  sink.finish();
  return 0;
}

int cmd_overhead(const json& params) {
  FrameAccounting accounting;
  accounting.payload_bits_per_frame = static_cast<int>(params["bits_per_frame"].get<long long>());
  accounting.sync_frames = static_cast<int>(params["sync_frames"].get<long long>());
  accounting.tag_frames = static_cast<int>(params["tag_frames"].get<long long>());
  Sink sink(params["out"].get<std::string>());
  auto& out = sink.out();
  write_header(out, "overhead", params);
  out << "payload_bytes payload_frames tag_frames overhead\n";
  for (const double bytes : reals(params["payloads"])) {
    out << format_number(bytes) << ' ' << payload_frames(bytes, accounting) << ' '
        << accounting.tag_frames << ' ' << format_number(overhead(bytes, accounting)) << "\n";
  }
  sink.finish();
  return 0;
}

int cmd_codebook_verify(const json& params) {
  const Codebook book = resolve_codebook(params["codebook"].get<std::string>());
  Sink sink(params["out"].get<std::string>());
  auto& out = sink.out();
  if (params["canonical"].get<bool>()) {
    out << serialize(book);
  } else {
    out << "name " << book.name() << "\n"
        << "words " << book.size() << "\n"
        << "word_length " << book.word_length() << "\n"
        << "declared_min_distance " << book.declared_min_distance() << "\n"
        << "verified_min_distance " << (book.size() >= 2 ? verify_min_distance(book.words()) : 0)
        << "\n";
  }
  sink.finish();
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Tag spotting for OFDM links: synthesis, channel, detection and analysis"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads for Monte Carlo (0: all cores)");

  std::vector<std::pair<std::unique_ptr<Command>, std::function<int(const json&)>>> commands;
  const auto add = [&](const std::string& name, const std::string& help, auto fn) -> Command& {
    commands.emplace_back(std::make_unique<Command>(app, name, help), fn);
    return *commands.back().first;
  };
  const json none = nullptr;

  add("modulate", "Synthesize one tag frame into an IQ file", cmd_modulate)
      .add("codebook", Kind::text, "builtin", "Codebook file, or 'builtin'")
      .add("index", Kind::integer, -1, "Codeword index (-1: random from the seed)")
      .add("power", Kind::real, 112.0, "Total spectral power of the tag")
      .add("papr_cap", Kind::optional_real, none, "PAPR cap in dB (resample phases until met)")
      .add("papr_attempts", Kind::integer, 64, "Phase draws tried for the PAPR cap")
      .add("sample_rate", Kind::real, 1.0e6, "Sample rate recorded in the sidecar")
      .add("seed", Kind::seed, none, "Random seed")
      .add("out", Kind::text, "", "Output IQ file");

  add("impair", "Apply fading, frequency offset, interference and noise", cmd_impair)
      .add("in", Kind::text, "", "Input IQ file")
      .add("out", Kind::text, "", "Output IQ file")
      .add("snr", Kind::optional_real, none, "Thick-carrier SNR in dB")
      .add("noise_power", Kind::optional_real, none, "Absolute per-bin noise power instead of --snr")
      .add("power", Kind::optional_real, none, "Per-thin tag power (default: from the sidecar)")
      .add("cfo", Kind::real, 0.0, "Frequency offset in thin-carrier widths")
      .add("fading", Kind::text, "none", "none, narrowband or wideband")
      .add("interference", Kind::text, "none", "none, data or tag")
      .add("sir", Kind::real, 0.0, "Signal to interference ratio in dB")
      .add("interference_offset", Kind::integer, 0, "Interferer start in samples")
      .add("scale", Kind::real, 1.0, "Amplitude scale applied to the input")
      .add("pad_before", Kind::integer, 0, "Zero samples placed before the input")
      .add("pad_after", Kind::integer, 0, "Zero samples placed after the input")
      .add("seed", Kind::seed, none, "Random seed");

  add("spot", "Detect tags in an IQ file; events as JSON lines, summary on stderr", cmd_spot)
      .add("in", Kind::text, "", "Input IQ file")
      .add("codebook", Kind::text, "builtin", "Codebook file, or 'builtin'")
      .add("gamma", Kind::real, 0.62, "Tag-strength threshold")
      .add("carrier_sense", Kind::optional_real, -1.0, "Carrier-sense gate in dB ('off' disables)")
      .add("denominator", Kind::text, "all_carriers", "all_carriers or non_null")
      .add("com_band", Kind::real, 0.25, "Allowed centre-of-mass band (fraction of the spectrum)")
      .add("noise_smoothing", Kind::real, 0.05, "Noise tracker smoothing factor")
      .add("initial_noise", Kind::optional_real, none, "Initial noise estimate (mean power per sample)")
      .add("emit_off_band", Kind::boolean, false, "Also report candidates outside the band")
      .add("out", Kind::text, "-", "Event output file");

  add("curves", "Detection, false-alarm and misclassification tables", cmd_curves)
      .add("models", Kind::text_list, json::array({"wideband"}), "Comma list: narrowband, wideband")
      .add("families", Kind::text_list, json::array({"single", "codebook", "pairs"}),
           "Comma list: single, codebook, pairs")
      .add("codebook", Kind::text, "builtin", "Codebook file, or 'builtin'")
      .add("gamma", Kind::real_list, parse_real_list("gamma", "0.45:0.7:0.01"), "Thresholds: list or start:stop:step")
      .add("snr", Kind::real_list, json::array({0.0, 1.0}), "SNRs in dB: list or start:stop:step")
      .add("denominator", Kind::text, "non_null", "all_carriers or non_null")
      .add("trials", Kind::integer, 100000, "Monte Carlo trials per point")
      .add("seed", Kind::seed, none, "Random seed")
      .add("out", Kind::text, "-", "Output table");

  add("leakage", "Frequency-offset leakage tables", cmd_leakage)
      .add("k_max", Kind::integer, 8, "Largest bin distance")
      .add("deltas", Kind::real_list, parse_real_list("deltas", "0:1:0.125"), "Offsets in bins")
      .add("max_offsets", Kind::real_list, json::array({0.5, 1.0, 2.0}), "Offset bounds in bins")
      .add("out", Kind::text, "-", "Output table");

  add("sweep", "False alarm at the median detection threshold versus active carriers", cmd_sweep)
      .add("total", Kind::integer, 56, "Available wide carriers")
      .add("snr", Kind::real, 0.0, "Thick-carrier SNR in dB")
      .add("alpha", Kind::integer, 8, "Thin carriers per wide carrier")
      .add("trials", Kind::integer, 20000, "Monte Carlo trials per point for the median check")
      .add("seed", Kind::seed, none, "Random seed")
      .add("out", Kind::text, "-", "Output table");

  add("range", "Range gain from an SNR margin", cmd_range)
      .add("gaps", Kind::real_list, json::array({20.0}), "SNR margins in dB")
      .add("exponents", Kind::real_list, json::array({3.0, 6.0}), "Path-loss exponents")
      .add("out", Kind::text, "-", "Output table");

  add("overhead", "Airtime overhead of a tag", cmd_overhead)
      .add("payloads", Kind::real_list, json::array({1500.0, 750.0}), "Payload sizes in bytes")
      .add("bits_per_frame", Kind::integer, 96, "Payload bits per data frame")
      .add("sync_frames", Kind::integer, 6, "Preamble and header frames")
      .add("tag_frames", Kind::integer, 8, "Frames occupied by a tag")
      .add("out", Kind::text, "-", "Output table");

  add("codebook-verify", "Validate a codebook and report its parameters", cmd_codebook_verify)
      .add("codebook", Kind::text, "builtin", "Codebook file, or 'builtin'")
      .add("canonical", Kind::boolean, false, "Print the canonical serialization instead")
      .add("out", Kind::text, "-", "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    set_worker_count(threads);
    for (const auto& [command, fn] : commands) {
      if (!command->app()->parsed()) continue;
      return fn(command->resolve());
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace tagspot::cli
