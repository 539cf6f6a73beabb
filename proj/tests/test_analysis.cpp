#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tagspot/analysis.hpp"
#include "tagspot/error.hpp"
#include "tagspot/fft.hpp"
#include "tagspot/waveform.hpp"

using namespace tagspot;

namespace {

const CarrierLayout kLayout = CarrierLayout::reference();

const Codebook& family() {
  static const Codebook book = conference_matrix_code(29, 2);
  return book;
}

double sum_gamma(Rng& rng, double shape) { return std::gamma_distribution<double>(shape, 1.0)(rng); }

bool within_3_sigma(const Estimate& e, double expected) {
  const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(e.trials));
  return std::abs(e.p() - expected) <= 3.0 * sigma + 1.0 / static_cast<double>(e.trials);
}

}  // namespace

TEST_CASE("single-carrier leakage") {
  for (int k = 1; k < 20; ++k) CHECK(leakage_single(k, 0.0) == 0.0);
  CHECK(leakage_single(0, 0.0) == 1.0);
  CHECK(leakage_single(0, 0.5) == doctest::Approx(4.0 / (std::numbers::pi * std::numbers::pi)));
  for (int k = 0; k < 10; ++k) {
    for (double d : {0.1, 0.25, 0.5, 0.9}) {
      const double x = std::numbers::pi * (k + d);
      CHECK(leakage_single(k, d) == doctest::Approx(std::pow(std::sin(x) / x, 2)).epsilon(1e-12));
      CHECK(leakage_single(k, d) <= 1.0 / ((k + d) * (k + d)) + 1e-15);
    }
  }
}

TEST_CASE("block leakage partial sums") {
  const double basel = std::numbers::pi * std::numbers::pi / 6.0;
  CHECK(leakage_block(1) == basel);
  CHECK(leakage_block(2) == doctest::Approx(basel - 1.0).epsilon(1e-14));
  double partial = 0.0;
  for (int c = 1; c < 5; ++c) partial += 1.0 / (c * c);
  CHECK(leakage_block(5) == doctest::Approx(basel - partial).epsilon(1e-14));
  CHECK(leakage_block(5) == doctest::Approx(0.2213).epsilon(1e-3));
  CHECK_THROWS_AS(leakage_block(0), ValidationError);
}

TEST_CASE("expected leak under a frequency offset") {
  const double two = expected_offset_leak(2.0, kLayout);
  CHECK(std::abs(two - 0.023) <= 0.003);
  CHECK(expected_offset_leak(1e-4, kLayout) < 1e-6);
  double previous = 0.0;
  for (double m : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    const double v = expected_offset_leak(m, kLayout);
    CHECK(v > previous);
    previous = v;
  }
  CHECK_THROWS_AS(expected_offset_leak(0.0, kLayout), ValidationError);
}

TEST_CASE("naive threshold balance") {
  CHECK(naive_threshold_snr_db(0.62, kLayout) == doctest::Approx(0.405).epsilon(0.01));
  CHECK(denominator_dof(kLayout, Denominator::non_null) == 2 * 8 * 28);
  CHECK(denominator_dof(kLayout, Denominator::all_carriers) == 2 * 8 * 36);
}

TEST_CASE("single-tag false alarm") {
  CHECK(pf_single(0.5, kLayout) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pf_single(0.999, kLayout) < 1e-100);
  const double at_062 = pf_single(0.62, kLayout);
  CHECK(at_062 > 1e-8);
  CHECK(at_062 < 1e-3);

  // Independent quadrature of the beta tail.
  for (double g : {0.45, 0.55, 0.6}) {
    CHECK(pf_single(g, kLayout) == doctest::Approx(oracle::beta_upper_tail(224.0, 224.0, g)).epsilon(1e-6));
    CHECK(pf_single(g, kLayout, Denominator::all_carriers) ==
          doctest::Approx(oracle::beta_upper_tail(224.0, 288.0, g)).epsilon(1e-6));
  }

  // Chi-square ratio Monte Carlo, 10^7 draws.
  Rng rng(12);
  const std::size_t draws = 10000000;
  std::size_t hits_055 = 0, hits_062 = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double in = sum_gamma(rng, 224.0);
    const double out = sum_gamma(rng, 224.0);
    const double s = in / (in + out);
    hits_055 += s > 0.55;
    hits_062 += s > 0.62;
  }
  const double e055 = pf_single(0.55, kLayout) * draws;
  const double e062 = at_062 * draws;
  CHECK(std::abs(static_cast<double>(hits_055) - e055) <= 3.0 * std::sqrt(e055));
  CHECK(std::abs(static_cast<double>(hits_062) - e062) <= 3.0 * std::sqrt(e062) + 1.0);

  double previous = 1.0;
  for (double g = 0.3; g < 0.8; g += 0.01) {
    const double v = pf_single(g, kLayout);
    CHECK(v <= previous);
    previous = v;
  }
}

TEST_CASE("single-tag detection against chi-square Monte Carlo") {
  for (const Fading fading : {Fading::wideband, Fading::narrowband}) {
    for (const Denominator den : {Denominator::non_null, Denominator::all_carriers}) {
      AnalysisModel model;
      model.fading = fading;
      model.denominator = den;
      model.snr_db = den == Denominator::non_null ? 0.0 : 1.0;
      const double ratio = (8.0 / 4.0) * std::pow(10.0, model.snr_db / 10.0);
      const double r_shape = den == Denominator::non_null ? 224.0 : 288.0;
      const auto est = run_trials(100000, 77, [&](Rng& rng, std::size_t) {
        double p_sum = 0.0;
        if (fading == Fading::wideband) {
          p_sum = (1.0 + ratio) * sum_gamma(rng, 112.0);
        } else {
          const double amp = std::sqrt(ratio);
          for (int b = 0; b < 112; ++b) {
            const double phase = uniform_phase(rng);
            p_sum += std::norm(amp * cplx(std::cos(phase), std::sin(phase)) + complex_normal(rng, 1.0));
          }
        }
        const double q = sum_gamma(rng, 112.0);
        const double r = sum_gamma(rng, r_shape);
        return (p_sum + q) / (p_sum + q + r) > model.gamma;
      });
      CHECK(within_3_sigma(est, pd_single(model)));
    }
  }
}

TEST_CASE("detection closed form properties") {
  AnalysisModel model;
  model.snr_db = -300.0;
  for (double g : {0.5, 0.55, 0.6, 0.62}) {
    model.gamma = g;
    CHECK(pd_single(model) == doctest::Approx(pf_single(g, kLayout)).epsilon(1e-6));
  }
  model.gamma = 0.62;
  double previous = 0.0;
  for (double snr = -6.0; snr <= 4.0; snr += 1.0) {
    model.snr_db = snr;
    const double v = pd_single(model);
    CHECK(v >= previous);
    CHECK(v <= 1.0);
    previous = v;
  }
  model.snr_db = 1.0;
  CHECK(pd_single(model) > 0.99);
  const auto curve = roc_single(model, {0.5, 0.55, 0.6, 0.65, 0.7});
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].pd <= curve.points[i - 1].pd);
    CHECK(curve.points[i].pf <= curve.points[i - 1].pf);
  }
}

TEST_CASE("closed form matches waveform-level detection") {
  // One window per trial: tag, wideband fading, noise, transform, strength of
  // the transmitted word with the analysis denominator.
  const auto mask = codeword_to_mask(family()[17], 28, kLayout);
  for (const double snr : {-1.0, 0.0}) {
    for (const double gamma : {0.6, 0.62}) {
      AnalysisModel model;
      model.snr_db = snr;
      model.gamma = gamma;
      const double n = noise_power_for_snr(snr, 1.0, kLayout);
      const auto est = run_trials(10000, 5, [&](Rng& rng, std::size_t) {
        IqFrame frame = synthesize_tag(build_tag_spectrum(mask, kLayout, 112.0, rng), kLayout);
        frame = apply_awgn(apply_fading(frame, Fading::wideband, kLayout, rng), n, rng);
        std::vector<cplx> bins(512);
        thread_fft(512).forward(std::span<const cplx>(frame.samples).subspan(128, 512), bins);
        return tag_strength(fold_spectrum(bins, kLayout), mask, kLayout, Denominator::non_null) > gamma;
      });
      CHECK(within_3_sigma(est, pd_single(model)));
    }
  }
}

TEST_CASE("family false alarm") {
  const auto one = family().prefix(1);
  const auto single = pf_family_mc(0.55, one, kLayout, 100000, 3);
  CHECK(within_3_sigma(single, pf_single(0.55, kLayout)));

  // Nested prefixes with shared draws: hits can only grow.
  std::size_t previous = 0;
  for (std::size_t size : {1u, 4u, 15u, 60u}) {
    const auto e = pf_family_mc(0.58, family().prefix(size), kLayout, 20000, 9);
    CHECK(e.hits >= previous);
    previous = e.hits;
  }
  const auto fam = pf_family_mc(0.58, family(), kLayout, 20000, 9);
  const auto pairs = pf_pairs_bound(0.58, kLayout, 20000, 9);
  CHECK(fam.p() > pf_single(0.58, kLayout));
  CHECK(pairs.hits >= fam.hits);
  CHECK(pf_pairs_bound(0.99, kLayout, 2000, 1).hits == 0);
  CHECK_THROWS_AS(pf_family_mc(0.5, family(), kLayout, 10, 1), ValidationError);
}

TEST_CASE("misclassification") {
  CHECK(pm_mc(60.0, family(), kLayout, Fading::wideband, 2000, 4).hits == 0);
  const auto coded = pm_mc(0.0, family(), kLayout, Fading::wideband, 10000, 4);
  CHECK(coded.p() < 1e-3);
  const auto uncoded = pm_mc_full_code(0.0, kLayout, Fading::wideband, 10000, 4);
  CHECK(uncoded.p() > coded.p());
}

TEST_CASE("active carrier sweep") {
  const auto points = sweep_active_carriers(56, 0.0, 8, 4000, 2);
  REQUIRE(points.size() == 55);
  const SweepPoint* best = &points.front();
  for (const auto& p : points) {
    if (p.pf < best->pf) best = &p;
    // The detection distribution is a scaled false-alarm distribution, so
    // at gamma0 the detection check sits at one half.
    CHECK(within_3_sigma(p.pd_check, 0.5));
    CHECK(p.gamma0 > 0.0);
    CHECK(p.gamma0 < 1.0);
  }
  CHECK(best->active >= 14);
  CHECK(best->active < 28);
  CHECK(points.front().pf > 1e3 * best->pf);
}

TEST_CASE("sweep thresholds reflect between q and N - q") {
  // Noise-only in/out ratios for q and N - q are reciprocals in
  // distribution, so their medians multiply to one.
  const auto points = sweep_active_carriers(56, 0.0, 8, 1000, 2);
  const double s = 2.0;  // 1 + p/n with alpha = beta at 0 dB
  for (int q = 1; q < 56; ++q) {
    const double g = points[static_cast<std::size_t>(q - 1)].gamma0;
    const double h = points[static_cast<std::size_t>(55 - q)].gamma0;
    const double k = g / (1.0 - g) / s;        // median of in/out for q
    const double k_reflected = h / (1.0 - h) / s;  // median for N - q
    CHECK(k * k_reflected == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("calculators") {
  CHECK(range_gain(20.0, 3.0) == doctest::Approx(4.6416).epsilon(1e-4));
  CHECK(range_gain(20.0, 6.0) == doctest::Approx(2.1544).epsilon(1e-4));
  CHECK(range_gain(0.0, 4.0) == 1.0);
  CHECK_THROWS_AS(range_gain(10.0, 0.0), ValidationError);
  CHECK(payload_frames(1500.0) == 125);
  CHECK(overhead(1500.0) == doctest::Approx(8.0 / 131.0));
  CHECK(payload_frames(750.0) == 63);
  CHECK(overhead(750.0) == doctest::Approx(8.0 / 69.0));
  CHECK(overhead(1e12) < 1e-8);
  CHECK_THROWS_AS(overhead(0.0), ValidationError);
}

TEST_CASE("monte carlo bookkeeping") {
  Estimate e{30, 1000};
  const double z = 1.959963984540054;
  const double p = 0.03;
  const double centre = (p + z * z / 2000.0) / (1.0 + z * z / 1000.0);
  const double half = z * std::sqrt(p * (1 - p) / 1000.0 + z * z / 4e6) / (1.0 + z * z / 1000.0);
  CHECK(e.ci95() == doctest::Approx(half).epsilon(1e-12));
  CHECK(centre > 0.0);
  CHECK(e.unreliable());
  CHECK_FALSE(Estimate{500, 1000}.unreliable());

  set_worker_count(1);
  const auto serial = pf_family_mc(0.56, family(), kLayout, 5000, 21);
  const auto serial_multi = run_trials_multi(3000, 8, 2, [](Rng& rng, std::size_t) {
    return static_cast<std::uint64_t>(rng() & 3u);
  });
  set_worker_count(4);
  const auto parallel = pf_family_mc(0.56, family(), kLayout, 5000, 21);
  const auto parallel_multi = run_trials_multi(3000, 8, 2, [](Rng& rng, std::size_t) {
    return static_cast<std::uint64_t>(rng() & 3u);
  });
  set_worker_count(0);
  CHECK(serial.hits == parallel.hits);
  CHECK(serial_multi == parallel_multi);

  const Estimate a{500, 1000}, b{500, 1000};
  CHECK(two_proportion_z(a, b) == 0.0);
}

TEST_CASE("fading models give similar detection at 0 dB") {
  AnalysisModel wide;
  AnalysisModel narrow;
  narrow.fading = Fading::narrowband;
  double worst = 0.0;
  double worst_gamma = 0.0;
  for (int i = 0; i <= 40; ++i) {
    wide.gamma = narrow.gamma = 0.5 + 0.005 * i;
    const double gap = std::abs(pd_single(wide) - pd_single(narrow));
    if (gap > worst) {
      worst = gap;
      worst_gamma = wide.gamma;
    }
  }
  MESSAGE("max |pd wideband - pd narrowband| at 0 dB: " << worst << " at gamma " << worst_gamma);
  CHECK(worst < 0.05);
}
