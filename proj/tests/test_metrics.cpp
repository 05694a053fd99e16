// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "labnet/common.hpp"
#include "labnet/metrics/metrics.hpp"
#include "labnet/sim/dataset.hpp"
#include "labnet/sim/synth.hpp"
#include "support.hpp"

using namespace labnet;
using namespace labnet::metrics;

namespace {

// Zero-mean reference plus a residual orthogonal to it, scaled to a target ratio.
std::pair<std::vector<float>, std::vector<float>> with_orthogonal_residual(Rng& rng, std::size_t n, double db) {
  std::vector<double> r(n), e(n);
  for (auto& v : r) v = normal(rng);
  for (auto& v : e) v = normal(rng);
  auto centre = [](std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double& x : v) x -= m;
  };
  centre(r);
  centre(e);
  double re = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += r[i] * e[i];
    rr += r[i] * r[i];
  }
  double ee = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e[i] -= re / rr * r[i];
    ee += e[i] * e[i];
  }
  const double g = std::sqrt(rr / ee / std::pow(10.0, db / 10.0));
  std::vector<float> ref(n), est(n);
  for (std::size_t i = 0; i < n; ++i) {
    ref[i] = static_cast<float>(r[i]);
    est[i] = static_cast<float>(r[i] + g * e[i]);
  }
  return {est, ref};
}

std::vector<float> add(const std::vector<float>& a, const std::vector<float>& b, double gain) {
  std::vector<float> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<float>(a[i] + gain * b[i]);
  return out;
}

double rms(const std::vector<float>& x) {
  double e = 0.0;
  for (float v : x) e += static_cast<double>(v) * v;
  return std::sqrt(e / static_cast<double>(x.size()));
}

std::vector<sim::MultichannelRecording> small_set(std::size_t n) {
  sim::DatasetConfig cfg;
  cfg.seed = 21;
  cfg.seconds = 1.5;
  cfg.scene.num_mics = 3;
  std::vector<sim::MultichannelRecording> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sim::synth_utterance(cfg, i));
  return out;
}

}  // namespace

TEST_CASE("si-snr of a perfect estimate hits the ceiling") {
  Rng rng(1);
  const auto x = testing::noise(rng, 8000);
  CHECK(si_snr(x, x) == kSiSnrCeiling);
}

TEST_CASE("si-snr matches constructed residual ratios") {
  Rng rng(2);
  for (double db : {-10.0, 0.0, 7.5, 25.0}) {
    const auto [est, ref] = with_orthogonal_residual(rng, 16000, db);
    CHECK(std::abs(si_snr(est, ref) - db) < 0.01);
  }
}

TEST_CASE("si-snr is invariant to scale and offset of the estimate") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ref = testing::noise(rng, 4000);
    const auto est = add(ref, testing::noise(rng, 4000), uniform(rng, 0.1, 2.0));
    const double base = si_snr(est, ref);
    const double g = uniform(rng, 0.05, 20.0) * (trial % 2 ? -1.0 : 1.0);
    const double offset = uniform(rng, -1.0, 1.0);
    std::vector<float> scaled(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) scaled[i] = static_cast<float>(g * est[i] + offset);
    // Negative gains flip the projection sign but not the energies.
    CHECK(si_snr(scaled, ref) == doctest::Approx(base).epsilon(1e-4));
  }
}

TEST_CASE("si-snr input validation") {
  Rng rng(4);
  const auto x = testing::noise(rng, 100);
  CHECK_THROWS_AS(si_snr(x, std::vector<float>(100, 0.0f)), InputError);
  CHECK_THROWS_AS(si_snr(x, std::vector<float>(100, 0.3f)), InputError);
  CHECK_THROWS_AS(si_snr(x, testing::noise(rng, 99)), InputError);
  CHECK_THROWS_AS(si_snr({}, {}), InputError);
  CHECK(si_snr(std::vector<float>(100, 0.0f), x) == -kSiSnrCeiling);
}

TEST_CASE("stoi of identical signals is one") {
  Rng rng(5);
  const auto s = sim::synth_speech(rng, 3.0);
  CHECK(stoi(s, s) == doctest::Approx(1.0).epsilon(1e-3));
  std::vector<float> neg(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) neg[i] = -s[i];
  CHECK(stoi(neg, s) == doctest::Approx(1.0).epsilon(1e-3));
  std::vector<float> quiet(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) quiet[i] = 0.1f * s[i];
  CHECK(stoi(quiet, s) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("stoi decreases with noise level") {
  Rng rng(6);
  const auto s = sim::synth_speech(rng, 3.0);
  const auto n = sim::synth_noise(rng, sim::NoiseKind::kWhite, 3.0);
  const double r = rms(s) / rms(n);
  double prev = 1.0;
  for (double snr : {20.0, 10.0, 0.0, -10.0}) {
    const double score = stoi(add(s, n, r * std::pow(10.0, -snr / 20.0)), s);
    CAPTURE(snr);
    CHECK(score < prev);
    CHECK(score > -1.0);
    prev = score;
  }
}

TEST_CASE("stoi input validation") {
  Rng rng(7);
  CHECK_THROWS_AS(stoi(testing::noise(rng, 6000), testing::noise(rng, 6000)), InputError);
  CHECK_THROWS_AS(stoi(testing::noise(rng, 8000), testing::noise(rng, 8001)), InputError);
  // Long enough overall but almost all silent.
  std::vector<float> mostly_silent(32000, 0.0f);
  for (std::size_t i = 0; i < 1000; ++i) mostly_silent[i] = static_cast<float>(normal(rng));
  CHECK_THROWS_AS(stoi(mostly_silent, mostly_silent), InputError);
}

TEST_CASE("resampling preserves in-band tones") {
  for (double freq : {100.0, 1000.0, 3500.0}) {
    std::vector<double> x(16000);
    for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::sin(2 * kPi * freq * static_cast<double>(n) / 16000.0);
    const auto y = resample(x, 10000, 16000);
    REQUIRE(y.size() == 10000);
    double err = 0.0;
    for (std::size_t m = 500; m < 9500; ++m) {
      err = std::max(err, std::abs(y[m] - std::sin(2 * kPi * freq * static_cast<double>(m) / 10000.0)));
    }
    CAPTURE(freq);
    CHECK(err < 1e-2);
  }
  std::vector<double> x(1000, 0.7);
  const auto up = resample(x, 3, 2);
  CHECK(up.size() == 1500);
  CHECK(up[750] == doctest::Approx(0.7).epsilon(1e-3));
  CHECK(resample(x, 4, 4) == x);
  CHECK_THROWS_AS(resample(x, 0, 1), ContractError);
}

TEST_CASE("resampling attenuates out-of-band tones") {
  std::vector<double> x(16000);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::sin(2 * kPi * 7000.0 * static_cast<double>(n) / 16000.0);
  const auto y = resample(x, 10000, 16000);
  double peak = 0.0;
  for (std::size_t m = 500; m < 9500; ++m) peak = std::max(peak, std::abs(y[m]));
  CHECK(peak < 0.05);
}

TEST_CASE("log spectral distance") {
  Rng rng(8);
  const auto s = testing::noise(rng, 16000);
  CHECK(log_spectral_distance(s, s) == 0.0);
  std::vector<float> louder(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) louder[i] = 2.0f * s[i];
  // White noise stays far above the power floor, so a pure gain shifts every bin alike.
  CHECK(log_spectral_distance(louder, s) == doctest::Approx(20 * std::log10(2.0)).epsilon(1e-6));
  CHECK_THROWS_AS(log_spectral_distance(louder, testing::noise(rng, 100)), InputError);
}

TEST_CASE("evaluate with identity and oracle enhancers") {
  const auto recs = small_set(3);
  const auto identity = evaluate(recs, [](const sim::MultichannelRecording& r) { return r.noisy[0]; });
  REQUIRE(identity.rows.size() == 3);
  for (const auto& row : identity.rows) {
    CHECK(row.error.empty());
    CHECK(row.si_snr_improvement == 0.0);
    CHECK(row.stoi == row.stoi_noisy);
    CHECK(row.num_mics == 3);
  }
  const auto oracle = evaluate(recs, [](const sim::MultichannelRecording& r) { return r.reverberant[0]; });
  for (const auto& row : oracle.rows) {
    CHECK(row.si_snr == kSiSnrCeiling);
    CHECK(row.stoi == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(row.lsd == 0.0);
  }
  double mean = 0.0;
  for (const auto& row : identity.rows) mean += row.si_snr;
  CHECK(identity.summary.si_snr == doctest::Approx(mean / 3.0));
  CHECK(identity.summary.count == 3);
  CHECK(identity.summary.failures == 0);
}

TEST_CASE("evaluate records failures and excludes them from means") {
  const auto recs = small_set(3);
  std::size_t calls = 0;
  const auto report = evaluate(recs, [&calls](const sim::MultichannelRecording& r) {
    if (calls++ == 1) throw NumericalError("boom");
    return r.noisy[0];
  });
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[1].error == "boom");
  CHECK(report.summary.count == 2);
  CHECK(report.summary.failures == 1);
  CHECK(report.summary.si_snr ==
        doctest::Approx((report.rows[0].si_snr + report.rows[2].si_snr) / 2.0));
  CHECK(to_json(report.rows[1]).contains("error"));
  CHECK(!to_json(report.rows[0]).contains("error"));

  const auto short_out = evaluate(recs, [](const sim::MultichannelRecording& r) {
    return std::vector<float>(r.length() - 1, 0.0f);
  });
  CHECK(short_out.summary.failures == 3);
  CHECK(short_out.rows[0].error.find("samples") != std::string::npos);
}
