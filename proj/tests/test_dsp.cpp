// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "labnet/common.hpp"
#include "labnet/dsp/fft.hpp"
#include "labnet/dsp/stft.hpp"
#include "support.hpp"

using namespace labnet;
using namespace labnet::dsp;
using labnet::testing::max_abs;
using labnet::testing::max_abs_diff;

namespace {

// Counts frames one at a time until the last real sample lies under two.
std::size_t frames_oracle(std::size_t len, std::size_t win, std::size_t hop) {
  const std::size_t lead = win - hop;
  std::size_t t = 0;
  auto covers = [&](std::size_t frame, std::size_t n) {
    const std::size_t start = frame * hop;
    return start <= n + lead && n + lead < start + win;
  };
  for (;;) {
    std::size_t count = 0;
    for (std::size_t f = 0; f < t; ++f) count += covers(f, len - 1);
    if (count == 2) return t;
    ++t;
  }
}

// Direct DFT of one windowed frame starting at real sample `start`.
std::vector<std::complex<double>> dft_frame(const std::vector<float>& x, long start, std::size_t win) {
  std::vector<std::complex<double>> out(win / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < win; ++n) {
      const long i = start + static_cast<long>(n);
      if (i < 0 || i >= static_cast<long>(x.size())) continue;
      const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * n / win);
      acc += w * x[i] * std::polar(1.0, -2.0 * kPi * k * n / win);
    }
    out[k] = acc;
  }
  return out;
}

std::vector<float> sinusoid(std::size_t n, double freq, double phase = 0.3) {
  std::vector<float> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<float>(std::sin(2.0 * kPi * freq * i / 16000.0 + phase));
  return x;
}

double interior_rel_error(const std::vector<float>& a, const std::vector<float>& b, std::size_t margin) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = margin; i + margin < a.size(); ++i) {
    num = std::max(num, std::abs(static_cast<double>(a[i]) - b[i]));
    den = std::max(den, std::abs(static_cast<double>(b[i])));
  }
  return num / den;
}

}  // namespace

TEST_CASE("frame count matches the coverage oracle") {
  DspConfig cfg;
  for (std::size_t len : {1u, 255u, 256u, 257u, 511u, 512u, 16000u, 64000u, 12345u}) {
    CHECK(num_frames(len, cfg) == frames_oracle(len, cfg.win_len, cfg.hop));
  }
  // Frozen from the oracle: 1 s and 4 s at 16 kHz.
  CHECK(num_frames(16000, cfg) == 64);
  CHECK(num_frames(64000, cfg) == 251);
}

TEST_CASE("zero input gives an all-zero grid") {
  DspConfig cfg;
  const std::vector<float> x(16000, 0.0f);
  const Spectrogram s = stft(x, cfg);
  CHECK(s.bins == 257);
  CHECK(s.frames == 64);
  CHECK(max_abs(s.data) == 0.0);
  CHECK(max_abs(istft(s, cfg, x.size())) == 0.0);
}

TEST_CASE("frames agree with a direct windowed DFT") {
  DspConfig cfg;
  Rng rng(3);
  const auto x = testing::noise(rng, 3000);
  const Spectrogram s = stft(x, cfg);
  const long lead = static_cast<long>(cfg.win_len - cfg.hop);
  for (std::size_t t : {std::size_t{0}, std::size_t{1}, std::size_t{5}, s.frames - 1}) {
    const auto ref = dft_frame(x, static_cast<long>(t * cfg.hop) - lead, cfg.win_len);
    double err = 0.0, scale = 0.0;
    for (std::size_t f = 0; f < s.bins; ++f) {
      err = std::max(err, std::abs(std::complex<double>(s.at(t, f)) - ref[f]));
      scale = std::max(scale, std::abs(ref[f]));
    }
    CHECK(err / scale < 1e-6);
  }
}

TEST_CASE("bin-centred sinusoid concentrates in its bin") {
  DspConfig cfg;
  const std::size_t k = 20;
  const auto x = sinusoid(16000, k * 16000.0 / 512.0);
  const Spectrogram s = stft(x, cfg);
  for (std::size_t t = 2; t + 2 < s.frames; ++t) {
    double total = 0.0;
    for (std::size_t f = 0; f < s.bins; ++f) total += std::norm(std::complex<double>(s.at(t, f)));
    // Hann leaks into the two neighbours; the centre bin alone holds 2/3.
    const double centre = std::norm(std::complex<double>(s.at(t, k)));
    const double main_lobe = centre + std::norm(std::complex<double>(s.at(t, k - 1))) +
                             std::norm(std::complex<double>(s.at(t, k + 1)));
    CHECK(main_lobe / total > 0.99);
    CHECK(centre / total == doctest::Approx(2.0 / 3.0).epsilon(1e-3));
  }
}

TEST_CASE("round trip reconstructs the interior") {
  DspConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto x = testing::noise(rng, 16000);
    const auto y = istft(stft(x, cfg), cfg, x.size());
    REQUIRE(y.size() == x.size());
    CHECK(interior_rel_error(y, x, cfg.win_len) < 1e-6);
  }
}

TEST_CASE("round trip covers the edges too") {
  DspConfig cfg;
  Rng rng(9);
  const auto x = testing::noise(rng, 4000);
  const auto y = istft(stft(x, cfg), cfg, x.size());
  CHECK(interior_rel_error(y, x, 0) < 1e-6);
}

TEST_CASE("stft is linear") {
  DspConfig cfg;
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = testing::noise(rng, 5000);
    const auto y = testing::noise(rng, 5000);
    const float a = static_cast<float>(uniform(rng, -2, 2)), b = static_cast<float>(uniform(rng, -2, 2));
    std::vector<float> z(x.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = a * x[i] + b * y[i];
    const auto sx = stft(x, cfg), sy = stft(y, cfg), sz = stft(z, cfg);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < sz.data.size(); ++i) {
      const std::complex<double> expect = static_cast<double>(a) * std::complex<double>(sx.data[i]) +
                                         static_cast<double>(b) * std::complex<double>(sy.data[i]);
      err = std::max(err, std::abs(std::complex<double>(sz.data[i]) - expect));
      scale = std::max(scale, std::abs(expect));
    }
    CHECK(err / scale < 1e-5);
  }
}

TEST_CASE("synthesis of one frame follows the hand-computed overlap-add") {
  DspConfig cfg;
  const std::size_t N = cfg.win_len, hop = cfg.hop;
  // Three frames, only the middle one non-zero: a flat spectrum delayed to
  // n0, i.e. an impulse at n0 inside frame 1.
  const std::size_t n0 = 100;
  Spectrogram s(3, cfg.num_bins());
  for (std::size_t f = 0; f < s.bins; ++f) {
    s.at(1, f) = std::polar(1.0f, static_cast<float>(-2.0 * kPi * static_cast<double>((f * n0) % N) / N));
  }
  const auto y = istft(s, cfg, 2 * hop);
  // Frame 1 starts at real sample 0. Sample n gets w[n] * delta[n - n0]
  // divided by the window-square sum of the frames covering it.
  const auto& w = hann_window(N);
  std::vector<double> expect(2 * hop, 0.0);
  for (std::size_t n = 0; n < 2 * hop; ++n) {
    const double contrib = n == n0 ? w[n] : 0.0;
    const double env = w[n] * w[n] + (n < hop ? w[n + hop] * w[n + hop] : w[n - hop] * w[n - hop]);
    expect[n] = contrib / env;
  }
  CHECK(max_abs_diff(y, expect) < 1e-6);
}

TEST_CASE("compression") {
  Spectrogram s(1, 3);
  s.at(0, 0) = {4.0f, 0.0f};
  s.at(0, 1) = {0.0f, -4.0f};
  s.at(0, 2) = {0.0f, 0.0f};
  const Compressed c = compress(s, 0.5f);
  CHECK(c.magnitude.at(0, 0) == doctest::Approx(2.0));
  CHECK(c.magnitude.at(0, 1) == doctest::Approx(2.0));
  CHECK(c.magnitude.at(0, 2) == 0.0f);
  CHECK(std::abs(c.complex.at(0, 1) - cfloat(0.0f, -2.0f)) < 1e-6);

  const Compressed id = compress(s, 1.0f);
  CHECK(id.magnitude.at(0, 0) == 4.0f);
  CHECK(id.magnitude.at(0, 1) == 4.0f);

  CHECK_THROWS_AS(compress(s, 0.0f), ContractError);
}

TEST_CASE("decompress inverts compress") {
  Rng rng(5);
  Spectrogram s(20, 33);
  for (auto& v : s.data) v = {static_cast<float>(normal(rng) * 10), static_cast<float>(normal(rng) * 10)};
  for (float p : {0.3f, 0.5f, 1.0f}) {
    const RealGrid back = decompress(compress(s, p).magnitude, p);
    const RealGrid mag = magnitude(s);
    for (std::size_t i = 0; i < mag.data.size(); ++i) {
      CHECK(std::abs(back.data[i] - mag.data[i]) <= 1e-6 * mag.data[i] + 1e-30);
    }
  }
}

TEST_CASE("constant phase gives zero phase differences") {
  Spectrogram s(6, 9);
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t f = 0; f < 9; ++f) s.at(t, f) = std::polar(1.0f + t + f, 0.7f);
  }
  const PhaseFeatures pf = phase_features(s);
  CHECK(max_abs(pf.time.data) < 1e-6);
  CHECK(max_abs(pf.freq.data) < 1e-6);
}

TEST_CASE("sinusoid phase advances by 2 pi k hop / N per frame") {
  DspConfig cfg;
  for (std::size_t k : {9u, 20u, 33u}) {
    const auto x = sinusoid(8000, k * 16000.0 / 512.0, 1.1);
    const PhaseFeatures pf = phase_features(stft(x, cfg));
    const double expect = wrap_phase(2.0 * kPi * k * cfg.hop / cfg.win_len);
    for (std::size_t t = 3; t + 3 < pf.time.frames; ++t) {
      CHECK(std::abs(wrap_phase(pf.time.at(t, k) - expect)) < 1e-3);
    }
  }
}

TEST_CASE("phase features lie in (-pi, pi]") {
  Rng rng(6);
  Spectrogram s(30, 40);
  for (auto& v : s.data) v = std::polar(1.0f, static_cast<float>(uniform(rng, -10, 10)));
  s.at(3, 3) = {-1.0f, 0.0f};
  s.at(3, 4) = {-1.0f, -0.0f};
  const PhaseFeatures pf = phase_features(s);
  for (const RealGrid* g : {&pf.time, &pf.freq}) {
    for (float v : g->data) {
      CHECK(v > -static_cast<float>(kPi));
      CHECK(v <= static_cast<float>(kPi));
    }
  }
  CHECK(wrap_phase(kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(3 * kPi) == doctest::Approx(kPi));
}

TEST_CASE("griffin-lim with zero iterations is a polar assembly") {
  Rng rng(7);
  RealGrid mag(5, 9), ph(5, 9);
  for (auto& v : mag.data) v = static_cast<float>(uniform(rng, 0, 2));
  for (auto& v : ph.data) v = static_cast<float>(uniform(rng, -3, 3));
  DspConfig cfg;
  cfg.win_len = 16;
  cfg.hop = 8;
  const Spectrogram s = griffin_lim(mag, ph, 0, cfg);
  const Spectrogram p = polar(mag, ph);
  CHECK(max_abs_diff(s.data, p.data) == 0.0);
}

TEST_CASE("true phase is already consistent") {
  DspConfig cfg;
  Rng rng(8);
  const auto x = testing::noise(rng, 8000);
  const Spectrogram s = stft(x, cfg);
  const RealGrid mag = magnitude(s);
  const Spectrogram g = griffin_lim(mag, phase(s), 1, cfg);
  double norm = 0.0;
  for (float v : mag.data) norm += static_cast<double>(v) * v;
  CHECK(consistency_error(g, mag, cfg) / std::sqrt(2.0 * norm) < 1e-5);
}

TEST_CASE("griffin-lim error never increases") {
  DspConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    const std::size_t T = 10 + seed, F = cfg.num_bins();
    RealGrid mag(T, F), ph(T, F, 0.0f);
    if (seed % 2 == 0) {
      // Magnitude of a real signal, zero initial phase.
      const auto x = testing::noise(rng, (T - 1) * cfg.hop);
      mag = magnitude(stft(x, cfg));
    } else {
      // Arbitrary non-negative target with random initial phase.
      for (auto& v : mag.data) v = static_cast<float>(std::abs(normal(rng)));
      for (auto& v : ph.data) v = static_cast<float>(uniform(rng, -kPi, kPi));
    }
    std::vector<double> errs;
    for (int it = 0; it <= 5; ++it) errs.push_back(consistency_error(griffin_lim(mag, ph, it, cfg), mag, cfg));
    for (int it = 1; it <= 5; ++it) {
      // Float storage of the iterate limits resolution to ~1e-6 relative.
      CHECK(errs[it] <= errs[it - 1] * (1.0 + 1e-6));
    }
    CHECK(errs[5] < errs[0]);
  }
}

TEST_CASE("fft convolution equals direct convolution") {
  Rng rng(10);
  std::vector<double> a(37), b(11);
  for (auto& v : a) v = normal(rng);
  for (auto& v : b) v = normal(rng);
  const auto c = fft_convolve(a, b);
  REQUIRE(c.size() == a.size() + b.size() - 1);
  for (std::size_t n = 0; n < c.size(); ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (n >= i && n - i < b.size()) s += a[i] * b[n - i];
    }
    CHECK(c[n] == doctest::Approx(s).epsilon(1e-9));
  }
}

TEST_CASE("invalid configuration and input are rejected") {
  DspConfig cfg;
  cfg.hop = 200;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  DspConfig ok;
  std::vector<float> bad(1000, 0.0f);
  bad[10] = NAN;
  CHECK_THROWS_AS(stft(bad, ok), InputError);
}
