// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Short-time objective intelligibility after Taal et al. (2011), following
// the reference implementation's frame/band conventions.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>

#include "labnet/common.hpp"
#include "labnet/dsp/fft.hpp"
#include "labnet/metrics/metrics.hpp"

namespace labnet::metrics {

namespace {

constexpr int kFs = 10000;
constexpr std::size_t kFrame = 256;
constexpr std::size_t kHop = 128;
constexpr std::size_t kFft = 512;
constexpr std::size_t kBands = 15;
constexpr double kMinFreq = 150.0;
constexpr std::size_t kSegment = 30;  // frames, 384 ms
constexpr double kBeta = -15.0;       // lower SDR bound, dB
constexpr double kDynRange = 40.0;
constexpr double kEps = 2.220446049250313e-16;

// Hann of length kFrame without the zero endpoints.
const std::array<double, kFrame>& window() {
  static const std::array<double, kFrame> w = [] {
    std::array<double, kFrame> a{};
    for (std::size_t n = 0; n < kFrame; ++n) {
      a[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(n + 1) / static_cast<double>(kFrame + 1));
    }
    return a;
  }();
  return w;
}

// Band index ranges [lo, hi) on the kFft/2+1 bin grid.
std::array<std::pair<std::size_t, std::size_t>, kBands> third_octave_bands() {
  const std::size_t bins = kFft / 2 + 1;
  auto nearest = [bins](double freq) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t i = 0; i < bins; ++i) {
      const double f = static_cast<double>(i) * kFs / static_cast<double>(kFft);
      const double d = (f - freq) * (f - freq);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  std::array<std::pair<std::size_t, std::size_t>, kBands> out{};
  for (std::size_t k = 0; k < kBands; ++k) {
    const double lo = kMinFreq * std::pow(2.0, (2.0 * k - 1.0) / 6.0);
    const double hi = kMinFreq * std::pow(2.0, (2.0 * k + 1.0) / 6.0);
    out[k] = {nearest(lo), nearest(hi)};
  }
  return out;
}

std::vector<std::vector<double>> frames_of(const std::vector<double>& x) {
  std::vector<std::vector<double>> out;
  if (x.size() < kFrame) return out;
  const auto& w = window();
  for (std::size_t i = 0; i + kFrame <= x.size(); i += kHop) {
    std::vector<double> f(kFrame);
    for (std::size_t n = 0; n < kFrame; ++n) f[n] = w[n] * x[i + n];
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<double> overlap_add(const std::vector<std::vector<double>>& frames) {
  if (frames.empty()) return {};
  std::vector<double> out((frames.size() - 1) * kHop + kFrame, 0.0);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (std::size_t n = 0; n < kFrame; ++n) out[i * kHop + n] += frames[i][n];
  }
  return out;
}

// Drops frames more than kDynRange dB below the loudest clean frame.
void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
  auto xf = frames_of(x);
  auto yf = frames_of(y);
  std::vector<double> energy(xf.size());
  double peak = -INFINITY;
  for (std::size_t i = 0; i < xf.size(); ++i) {
    double e = 0.0;
    for (double v : xf[i]) e += v * v;
    energy[i] = 20.0 * std::log10(std::sqrt(e) + kEps);
    peak = std::max(peak, energy[i]);
  }
  std::vector<std::vector<double>> xk, yk;
  for (std::size_t i = 0; i < xf.size(); ++i) {
    if (peak - kDynRange - energy[i] < 0.0) {
      xk.push_back(std::move(xf[i]));
      yk.push_back(std::move(yf[i]));
    }
  }
  x = overlap_add(xk);
  y = overlap_add(yk);
}

// One-third octave band envelopes, [band][frame].
std::vector<std::vector<double>> band_envelopes(const std::vector<double>& x) {
  static const auto bands = third_octave_bands();
  const auto& w = window();
  const dsp::RealFft& fft = dsp::real_fft(kFft);
  std::vector<double> buf(kFft);
  std::vector<std::complex<double>> spec(fft.bins());
  std::vector<std::vector<double>> out(kBands);
  // Frames start at 0, hop, ... while start < len - kFrame.
  for (std::size_t i = 0; i + kFrame < x.size(); i += kHop) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t n = 0; n < kFrame; ++n) buf[n] = w[n] * x[i + n];
    fft.forward(buf.data(), spec.data());
    for (std::size_t k = 0; k < kBands; ++k) {
      double e = 0.0;
      for (std::size_t b = bands[k].first; b < bands[k].second; ++b) e += std::norm(spec[b]);
      out[k].push_back(std::sqrt(e));
    }
  }
  return out;
}

double kaiser(double n, double len, double beta) {
  const double r = 2.0 * n / len - 1.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) /
         std::cyl_bessel_i(0.0, beta);
}

}  // namespace

std::vector<double> resample(const std::vector<double>& x, int up, int down) {
  if (up <= 0 || down <= 0) throw ContractError("resample: factors must be positive");
  const int g = std::gcd(up, down);
  up /= g;
  down /= g;
  if (up == 1 && down == 1) return x;
  const int ratio = std::max(up, down);
  const long half = 10L * ratio;
  const double fc = 1.0 / ratio;  // relative to the upsampled Nyquist
  std::vector<double> h(static_cast<std::size_t>(2 * half + 1));
  for (long n = 0; n <= 2 * half; ++n) {
    const double t = static_cast<double>(n - half);
    const double sinc = t == 0.0 ? 1.0 : std::sin(kPi * fc * t) / (kPi * fc * t);
    h[static_cast<std::size_t>(n)] = up * fc * sinc * kaiser(static_cast<double>(n), 2.0 * half, 5.0);
  }
  const std::size_t out_len = (x.size() * static_cast<std::size_t>(up) + down - 1) / down;
  std::vector<double> y(out_len, 0.0);
  const long xu_len = static_cast<long>(x.size()) * up;
  for (std::size_t m = 0; m < out_len; ++m) {
    const long centre = static_cast<long>(m) * down + half;
    // Only taps landing on non-zero (multiple of up) samples contribute.
    long j_lo = std::max(0L, centre - 2 * half);
    j_lo += (up - j_lo % up) % up;
    const long j_hi = std::min(xu_len - 1, centre);
    double acc = 0.0;
    for (long j = j_lo; j <= j_hi; j += up) acc += h[static_cast<std::size_t>(centre - j)] * x[static_cast<std::size_t>(j / up)];
    y[m] = acc;
  }
  return y;
}

double stoi(const std::vector<float>& est, const std::vector<float>& ref, int sample_rate) {
  if (est.size() != ref.size()) throw InputError("stoi: length mismatch");
  if (sample_rate <= 0) throw InputError("stoi: invalid sample rate");
  const double min_len = 0.384 * sample_rate;
  if (static_cast<double>(ref.size()) < min_len) {
    throw InputError("stoi: signals shorter than 384 ms");
  }
  std::vector<double> x(ref.begin(), ref.end()), y(est.begin(), est.end());
  if (sample_rate != kFs) {
    x = resample(x, kFs, sample_rate);
    y = resample(y, kFs, sample_rate);
  }
  remove_silent_frames(x, y);
  const auto xb = band_envelopes(x);
  const auto yb = band_envelopes(y);
  const std::size_t frames = xb[0].size();
  if (frames < kSegment) {
    throw InputError("stoi: fewer than 30 non-silent frames (" + std::to_string(frames) + ")");
  }
  const double clip = std::pow(10.0, -kBeta / 20.0);
  double total = 0.0;
  const std::size_t segments = frames - kSegment + 1;
  std::array<double, kSegment> xs{}, ys{};
  for (std::size_t m = kSegment; m <= frames; ++m) {
    for (std::size_t k = 0; k < kBands; ++k) {
      double nx = 0.0, ny = 0.0;
      for (std::size_t i = 0; i < kSegment; ++i) {
        xs[i] = xb[k][m - kSegment + i];
        ys[i] = yb[k][m - kSegment + i];
        nx += xs[i] * xs[i];
        ny += ys[i] * ys[i];
      }
      const double alpha = std::sqrt(nx) / (std::sqrt(ny) + kEps);
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < kSegment; ++i) {
        ys[i] = std::min(ys[i] * alpha, xs[i] * (1.0 + clip));
        mx += xs[i];
        my += ys[i];
      }
      mx /= kSegment;
      my /= kSegment;
      double sxy = 0.0, sxx = 0.0, syy = 0.0;
      for (std::size_t i = 0; i < kSegment; ++i) {
        const double a = xs[i] - mx, b = ys[i] - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
      }
      total += sxy / ((std::sqrt(sxx) + kEps) * (std::sqrt(syy) + kEps));
    }
  }
  return total / static_cast<double>(kBands * segments);
}

}  // namespace labnet::metrics
