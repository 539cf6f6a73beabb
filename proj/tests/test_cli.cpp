#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tagspot/analysis.hpp"
#include "tagspot/fft.hpp"
#include "tagspot/iq_file.hpp"

using namespace tagspot;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const fs::path& workdir() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "tagspot_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path file(const std::string& name) { return workdir() / name; }

Run tool(const std::string& args) {
  const auto out = file("stdout.txt");
  const auto err = file("stderr.txt");
  const std::string command = std::string(TAGSPOT_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(command.c_str());
  Run run;
  run.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  run.out = slurp(out);
  run.err = slurp(err);
  return run;
}

std::vector<std::vector<double>> table_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    std::istringstream fields(line);
    std::vector<double> row;
    for (double v; fields >> v;) row.push_back(v);
    rows.push_back(row);
  }
  return rows;
}

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(nlohmann::json::parse(line));
  }
  return lines;
}

/// Periodogram power at each thin offset, summed over wide carriers.
std::vector<double> offset_profile(const IqFrame& frame, std::size_t start) {
  const auto layout = CarrierLayout::reference();
  std::vector<cplx> bins(512);
  thread_fft(512).forward(std::span<const cplx>(frame.samples).subspan(start, 512), bins);
  std::vector<double> profile(8, 0.0);
  for (int w = 0; w < 64; ++w) {
    for (int o = 0; o < 8; ++o) profile[static_cast<std::size_t>(o)] += std::norm(bins[static_cast<std::size_t>(layout.thin_bin(w, o))]);
  }
  return profile;
}

}  // namespace

TEST_CASE("modulate writes a reproducible tag frame") {
  const auto a = file("word0_a.cf32");
  const auto b = file("word0_b.cf32");
  REQUIRE(tool("modulate --index 0 --seed 3 --out " + a.string()).status == 0);
  const auto run = tool("modulate --index 0 --seed 3 --out " + b.string());
  REQUIRE(run.status == 0);
  CHECK(fs::file_size(a) == 640 * 8);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(sidecar_path(a)).size() > 0);
  CHECK(run.out.find("codeword_index 0") != std::string::npos);
  CHECK(run.out.find("papr_db") != std::string::npos);
  CHECK(run.out.find("power 112") != std::string::npos);

  const auto frame = read_iq_file(a);
  CHECK(frame.frame.samples.size() == 640);
  CHECK(frame.meta.extra["codeword_index"] == 0);

  const auto capped = tool("modulate --index 7 --seed 5 --papr-cap 9 --papr-attempts 100 --out " + file("capped.cf32").string());
  REQUIRE(capped.status == 0);
  const auto meta = read_iq_file(file("capped.cf32")).meta.extra;
  CHECK((meta["papr_db"].get<double>() <= 9.0 || !meta["papr_cap_met"].get<bool>()));

  CHECK(tool("modulate --index 60 --seed 1 --out " + file("bad.cf32").string()).status == 1);
  CHECK(tool("modulate --index 0 --out " + file("bad.cf32").string()).status == 1);
  CHECK(tool("modulate --index 0 --seed 1 --codebook /nonexistent/book.txt --out " + file("bad.cf32").string()).status == 2);
}

TEST_CASE("impair: passthrough, noise calibration, frequency offset") {
  const auto tag = file("tag.cf32");
  REQUIRE(tool("modulate --index 11 --seed 8 --out " + tag.string()).status == 0);

  const auto same = file("same.cf32");
  REQUIRE(tool("impair --in " + tag.string() + " --out " + same.string()).status == 0);
  CHECK(slurp(same) == slurp(tag));

  // 0 dB with p = 1: n = 0.5 per sample, measured on the appended silence.
  const auto noisy = file("noisy.cf32");
  REQUIRE(tool("impair --in " + tag.string() + " --out " + noisy.string() + " --snr 0 --pad-after 200000 --seed 4").status == 0);
  const auto rx = read_iq_file(noisy).frame;
  double noise = 0.0;
  for (std::size_t k = 640; k < rx.samples.size(); ++k) noise += std::norm(rx.samples[k]);
  noise /= static_cast<double>(rx.samples.size() - 640);
  CHECK(noise == doctest::Approx(0.5).epsilon(0.01));

  const auto shifted = file("shifted.cf32");
  REQUIRE(tool("impair --in " + tag.string() + " --out " + shifted.string() + " --cfo 0.5").status == 0);
  // Guard bins are empty before the shift; a +0.5 shift fills the guard bin
  // just above the active block (distance 0.5) far more than the one just
  // below it (distance 1.5).
  const auto before = offset_profile(read_iq_file(tag).frame, 128);
  const auto after = offset_profile(read_iq_file(shifted).frame, 128);
  CHECK(before[1] < 1e-9 * 112.0);  // float32 storage floor
  CHECK(before[6] < 1e-9 * 112.0);
  CHECK(after[6] > 4.0 * after[1]);
  CHECK(after[6] > 0.05 * (after[2] + after[3] + after[4] + after[5]));

  CHECK(tool("impair --in " + file("missing.cf32").string() + " --out " + same.string()).status == 2);
  CHECK(tool("impair --in " + tag.string() + " --out " + same.string() + " --cfo 3").status == 1);
  CHECK(tool("impair --in " + tag.string() + " --out " + same.string() + " --snr 0").status == 1);
}

TEST_CASE("spot finds a clean tag once") {
  const auto tag = file("spot_tag.cf32");
  const auto stream = file("spot_stream.cf32");
  REQUIRE(tool("modulate --index 42 --seed 9 --out " + tag.string()).status == 0);
  REQUIRE(tool("impair --in " + tag.string() + " --out " + stream.string() +
               " --snr 30 --cfo 1.3 --pad-before 1000 --pad-after 1500 --seed 10").status == 0);
  const auto run = tool("spot --in " + stream.string());
  REQUIRE(run.status == 0);
  const auto events = json_lines(run.out);
  REQUIRE(events.size() == 1);
  CHECK(events[0]["codeword_index"] == 42);
  CHECK(events[0]["strength"].get<double>() > 0.62);
  const auto summary = nlohmann::json::parse(run.err);
  CHECK(summary["detections"] == 1);
  CHECK(summary["windows_analyzed"].get<int>() + summary["windows_gated"].get<int>() == summary["windows_total"].get<int>());
  CHECK(summary["config"]["gamma"] == 0.62);
}

TEST_CASE("spot on noise") {
  // 20 s at 1 MHz of noise only.
  const auto seed_frame = file("silent.cf32");
  const auto noise = file("noise20s.cf32");
  REQUIRE(tool("modulate --index 0 --seed 1 --out " + seed_frame.string()).status == 0);
  REQUIRE(tool("impair --in " + seed_frame.string() + " --out " + noise.string() +
               " --scale 0 --pad-after 19999360 --noise-power 1 --seed 12").status == 0);
  const auto quiet = tool("spot --in " + noise.string());
  REQUIRE(quiet.status == 0);
  const auto summary = nlohmann::json::parse(quiet.err);
  CHECK(summary["duration_s"].get<double>() == doctest::Approx(20.0));
  CHECK(summary["detections"] == 0);
  fs::remove(noise);

  const auto short_noise = file("noise_short.cf32");
  REQUIRE(tool("impair --in " + seed_frame.string() + " --out " + short_noise.string() +
               " --scale 0 --pad-after 64000 --noise-power 1 --seed 13").status == 0);
  const auto loose = tool("spot --gamma 0.3 --in " + short_noise.string());
  REQUIRE(loose.status == 0);
  CHECK(json_lines(loose.out).size() > 20);
}

TEST_CASE("curves are deterministic and match the closed form") {
  const std::string args = "curves --families single,codebook --gamma 0.55,0.62 --snr 0,1 --trials 2000 --seed 5";
  const auto first = tool(args);
  const auto second = tool(args);
  REQUIRE(first.status == 0);
  CHECK(first.out == second.out);
  CHECK(first.out.find("# seed: 5") != std::string::npos);
  CHECK(first.out.find("# config: ") != std::string::npos);
  CHECK(first.out.find("# layout: ") != std::string::npos);
  CHECK(first.out.find("gamma snr_db pd pf pm trials ci") != std::string::npos);

  const auto rows = table_rows(first.out);
  REQUIRE(rows.size() == 8);
  const auto layout = CarrierLayout::reference();
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(rows[i].size() == 7);
    AnalysisModel model;
    model.gamma = rows[i][0];
    model.snr_db = rows[i][1];
    CHECK(rows[i][2] == doctest::Approx(pd_single(model)).epsilon(1e-8));
    CHECK(rows[i][3] == doctest::Approx(pf_single(rows[i][0], layout)).epsilon(1e-8));
  }
  // The coded family at 1 dB and 0.62.
  CHECK(rows[7][2] > 0.99);

  CHECK(tool("curves --families codebook --trials 2000").status == 1);
  CHECK(tool("curves --families single --gamma 1.5").status == 1);
}

TEST_CASE("calculator commands") {
  const auto leak = tool("leakage --k-max 2 --deltas 0");
  REQUIRE(leak.status == 0);
  CHECK(leak.out.find("1 1.644934067") != std::string::npos);
  CHECK(leak.out.find("1 0 0\n") != std::string::npos);

  const auto sweep = tool("sweep --seed 1 --trials 1000");
  REQUIRE(sweep.status == 0);
  const auto pos = sweep.out.find("# argmin_active: ");
  REQUIRE(pos != std::string::npos);
  const int argmin = std::stoi(sweep.out.substr(pos + 17));
  CHECK(argmin < 28);
  CHECK(argmin > 14);

  const auto range = tool("range --gaps 20,0 --exponents 3");
  REQUIRE(range.status == 0);
  CHECK(range.out.find("20 3 4.641588834") != std::string::npos);
  CHECK(range.out.find("0 3 1\n") != std::string::npos);

  const auto over = tool("overhead --payloads 1500");
  REQUIRE(over.status == 0);
  CHECK(over.out.find("1500 125 8 0.06106870229") != std::string::npos);
}

TEST_CASE("config documents") {
  const auto config = file("range.json");
  std::ofstream(config) << R"({"version": 1, "gaps": [10], "exponents": [2]})";
  auto run = tool("range --config " + config.string());
  REQUIRE(run.status == 0);
  CHECK(run.out.find("10 2 3.16227766") != std::string::npos);
  run = tool("range --config " + config.string() + " --exponents 5");
  REQUIRE(run.status == 0);
  CHECK(run.out.find("10 5 1.584893192") != std::string::npos);

  std::ofstream(file("unversioned.json")) << R"({"gaps": [10]})";
  CHECK(tool("range --config " + file("unversioned.json").string()).status == 1);
  std::ofstream(file("unknown.json")) << R"({"version": 1, "colour": "red"})";
  CHECK(tool("range --config " + file("unknown.json").string()).status == 1);
  CHECK(tool("range --config " + file("absent.json").string()).status == 2);
  CHECK(tool("range --bogus-flag").status == 1);
  CHECK(tool("").status == 1);
}

TEST_CASE("codebook-verify") {
  const auto run = tool(std::string("codebook-verify --codebook ") + TAGSPOT_DATA_DIR + "/codebooks/sloane_seidel_28_60_13.txt");
  REQUIRE(run.status == 0);
  CHECK(run.out.find("words 60") != std::string::npos);
  CHECK(run.out.find("verified_min_distance 13") != std::string::npos);

  const auto canonical = tool("codebook-verify --canonical");
  CHECK(canonical.out == slurp(std::string(TAGSPOT_DATA_DIR) + "/codebooks/sloane_seidel_28_60_13.txt"));

  std::ofstream(file("bad_book.txt")) << "name: bad\nword_length: 4\nmin_distance: 2\n0000\n0001\n";
  const auto bad = tool("codebook-verify --codebook " + file("bad_book.txt").string());
  CHECK(bad.status == 1);
  CHECK(bad.err.find("distance") != std::string::npos);
}
