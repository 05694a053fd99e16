// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "labnet/baselines/beamformers.hpp"
#include "labnet/common.hpp"
#include "labnet/dsp/fft.hpp"
#include "labnet/sim/synth.hpp"
#include "support.hpp"

using namespace labnet;
using namespace labnet::baselines;
using labnet::testing::max_abs;
using labnet::testing::max_abs_diff;

namespace {

std::vector<dsp::Spectrogram> spectra(const std::vector<std::vector<float>>& waves) {
  std::vector<dsp::Spectrogram> out;
  for (const auto& w : waves) out.push_back(dsp::stft(w, {}));
  return out;
}

double energy(const std::vector<float>& x, std::size_t skip = 0) {
  double e = 0.0;
  for (std::size_t i = skip; i + skip < x.size(); ++i) e += static_cast<double>(x[i]) * x[i];
  return e;
}

// Anechoic source at `src` seen by each mic, plus independent white noise.
sim::MultichannelRecording anechoic(Rng& rng, const std::vector<sim::Vec3>& mics, double noise_rms,
                                    std::size_t len = 32000) {
  sim::RoomSpec room{8, 7, 3, 0.3};
  const sim::Vec3 src{2.0, 3.0, 1.5};
  sim::RirOptions opt;
  opt.reflection = 0.0;
  const auto clean = sim::synth_speech(rng, static_cast<double>(len) / 16000.0);
  sim::MultichannelRecording rec;
  rec.scene.room = room;
  rec.scene.source = src;
  rec.scene.mics = mics;
  std::vector<double> dry(clean.begin(), clean.end());
  for (const auto& m : mics) {
    const auto h = sim::simulate_rir(room, src, m, opt);
    const auto y = dsp::fft_convolve(dry, h);
    std::vector<float> yf(len), nf(len), xf(len);
    for (std::size_t i = 0; i < len; ++i) {
      yf[i] = static_cast<float>(y[i]);
      nf[i] = static_cast<float>(noise_rms * normal(rng));
      xf[i] = yf[i] + nf[i];
    }
    rec.reverberant.push_back(yf);
    rec.noise.push_back(nf);
    rec.noisy.push_back(xf);
  }
  return rec;
}

sim::MultichannelRecording reorder(const sim::MultichannelRecording& rec, const std::vector<std::size_t>& order) {
  sim::MultichannelRecording out = rec;
  out.noisy.clear();
  out.reverberant.clear();
  out.noise.clear();
  for (std::size_t i : order) {
    out.noisy.push_back(rec.noisy[i]);
    out.reverberant.push_back(rec.reverberant[i]);
    out.noise.push_back(rec.noise[i]);
  }
  return out;
}

}  // namespace

TEST_CASE("spatially white noise has a scaled identity covariance") {
  Rng rng(1);
  const std::size_t len = 16000 * 10;
  std::vector<std::vector<float>> n{testing::noise(rng, len, 0.5), testing::noise(rng, len, 0.5)};
  const auto s = spectra(n);
  const OracleStats st = oracle_stats(s, s);
  // Hann analysis of unit-variance white noise: E|X|^2 = sigma^2 * sum w^2.
  double w2 = 0.0;
  for (double w : dsp::hann_window(512)) w2 += w * w;
  const double expect = 0.25 * w2;
  // One bin averages ~625 frames (~5% spread), so pool the bins.
  double d0 = 0.0, d1 = 0.0, off = 0.0;
  std::size_t count = 0;
  for (std::size_t f = 5; f < 250; ++f, ++count) {
    const auto& r = st.noise[f];
    d0 += r(0, 0).real();
    d1 += r(1, 1).real();
    off += std::abs(r(0, 1));
  }
  CHECK(d0 / count == doctest::Approx(expect).epsilon(0.03));
  CHECK(d1 / count == doctest::Approx(expect).epsilon(0.03));
  CHECK(off / count < 0.1 * expect);
}

TEST_CASE("coherent duplicated channels give a rank-one covariance") {
  Rng rng(2);
  const auto x = testing::noise(rng, 8000);
  const auto s = spectra({x, x, x});
  const OracleStats st = oracle_stats(s, s);
  for (std::size_t f = 1; f < 256; f += 11) {
    const auto& r = st.speech[f];
    const auto ref = r(0, 0);
    for (long i = 0; i < 3; ++i)
      for (long j = 0; j < 3; ++j) CHECK(std::abs(r(i, j) - ref) <= 1e-12 * std::abs(ref));
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(r);
    CHECK(eig.eigenvalues()(1) < 1e-9 * eig.eigenvalues()(2));
  }
}

TEST_CASE("covariances are Hermitian and the noise one is loaded") {
  Rng rng(3);
  const auto rec = anechoic(rng, {{5, 3, 1.5}, {5.3, 3.2, 1.4}, {4.8, 2.5, 1.6}}, 0.05, 8000);
  const OracleStats st = oracle_stats(rec, {});
  REQUIRE(st.channels() == 3);
  REQUIRE(st.bins() == 257);
  for (std::size_t f = 0; f < st.bins(); ++f) {
    CHECK((st.speech[f] - st.speech[f].adjoint()).norm() < 1e-6);
    CHECK((st.noise[f] - st.noise[f].adjoint()).norm() < 1e-6);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(st.noise[f]);
    CHECK(eig.eigenvalues()(0) > 0.0);
  }
}

TEST_CASE("mvdr satisfies the distortionless constraint") {
  Rng rng(4);
  const auto rec = anechoic(rng, {{5, 3, 1.5}, {5.4, 3.1, 1.5}, {4.6, 3.6, 1.2}, {6.0, 2.0, 2.0}}, 0.02, 16000);
  const MvdrResult r = mvdr(rec, {});
  CHECK(r.max_constraint_error < 1e-6);
  for (std::size_t f = 0; f < r.weights.size(); ++f) {
    CHECK(std::abs(std::complex<double>(r.weights[f].adjoint() * r.steering[f]) - 1.0) < 1e-6);
    CHECK(r.steering[f](0) == std::complex<double>(1.0, 0.0));
  }
  CHECK(r.wave.size() == rec.length());
}

TEST_CASE("single-channel mvdr passes the reference through") {
  Rng rng(5);
  const auto rec = anechoic(rng, {{5, 3, 1.5}}, 0.05, 8000);
  const MvdrResult r = mvdr(rec, {});
  for (const auto& w : r.weights) CHECK(std::abs(w(0) - 1.0) < 1e-12);
  CHECK(max_abs_diff(r.wave, rec.noisy[0]) < 1e-6 * max_abs(rec.noisy[0]));
}

TEST_CASE("mvdr array gain on an anechoic pair") {
  Rng rng(6);
  for (int trial = 0; trial < 3; ++trial) {
    const auto rec = anechoic(rng, {{5, 3, 1.5}, {5.2 + 0.3 * trial, 3.4, 1.5}}, 0.03);
    const OracleStats st = oracle_stats(rec, {});
    const auto out_s = mvdr(spectra(rec.reverberant), st, {}, rec.length()).wave;
    const auto out_n = mvdr(spectra(rec.noise), st, {}, rec.length()).wave;
    const double in_snr = 10 * std::log10(energy(rec.reverberant[0]) / energy(rec.noise[0]));
    const double out_snr = 10 * std::log10(energy(out_s) / energy(out_n));
    CAPTURE(in_snr);
    CHECK(out_snr >= in_snr);
  }
}

TEST_CASE("mvdr ignores the order of non-reference channels") {
  Rng rng(7);
  const auto rec = anechoic(rng, {{5, 3, 1.5}, {5.4, 3.1, 1.5}, {4.6, 3.6, 1.2}, {6.0, 2.0, 2.0}}, 0.05, 16000);
  const auto a = mvdr(rec, {}).wave;
  const auto b = mvdr(reorder(rec, {0, 3, 1, 2}), {}).wave;
  CHECK(max_abs_diff(a, b) < 1e-5 * max_abs(a));
}

TEST_CASE("singular noise statistics name the bin") {
  Rng rng(8);
  auto rec = anechoic(rng, {{5, 3, 1.5}, {5.4, 3.1, 1.5}}, 0.05, 4000);
  for (auto& n : rec.noise) std::fill(n.begin(), n.end(), 0.0f);
  try {
    (void)mvdr(rec, {});
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("bin") != std::string::npos);
  }
}

TEST_CASE("delay-and-sum") {
  Rng rng(9);
  const auto x = testing::noise(rng, 4000);
  CHECK(delay_and_sum({x}, {0}) == x);
  CHECK(max_abs_diff(delay_and_sum({x, x, x}, {0, 0, 0}), x) < 1e-6);

  SUBCASE("array gain with the true delays") {
    const std::size_t len = 48000;
    const auto s = testing::noise(rng, len + 100);
    const std::vector<long> delays{0, 7, -5, 13};
    std::vector<std::vector<float>> speech, noise;
    for (long d : delays) {
      std::vector<float> ch(len);
      for (std::size_t n = 0; n < len; ++n) ch[n] = s[static_cast<std::size_t>(static_cast<long>(n) + 50 - d)];
      speech.push_back(ch);
      noise.push_back(testing::noise(rng, len));
    }
    const auto ys = delay_and_sum(speech, delays);
    const auto yn = delay_and_sum(noise, delays);
    const double gain = 10 * std::log10(energy(ys, 20) / energy(yn, 20)) -
                        10 * std::log10(energy(speech[0], 20) / energy(noise[0], 20));
    CHECK(std::abs(gain - 10 * std::log10(4.0)) < 1.0);
  }
  SUBCASE("permutation with delays permuted alongside") {
    std::vector<std::vector<float>> ch{x, testing::noise(rng, 4000), testing::noise(rng, 4000)};
    const auto a = delay_and_sum(ch, {0, 3, -2});
    const auto b = delay_and_sum({ch[0], ch[2], ch[1]}, {0, -2, 3});
    CHECK(max_abs_diff(a, b) < 1e-6);
  }
}

TEST_CASE("geometric delays") {
  sim::Scene scene;
  scene.source = {1, 1, 1};
  scene.mics = {{1, 1 + 3.43, 1}, {1, 1 + 3.43 * 2, 1}};
  const auto d = geometric_delays(scene);
  REQUIRE(d.size() == 2);
  CHECK(d[0] == 0);
  CHECK(d[1] == 160);
}
