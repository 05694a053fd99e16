// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "labnet/common.hpp"
#include "labnet/dsp/stft.hpp"
#include "labnet/metrics/metrics.hpp"

namespace labnet::metrics {

double si_snr(const std::vector<float>& est, const std::vector<float>& ref) {
  if (est.size() != ref.size()) {
    throw InputError("si_snr: length mismatch (" + std::to_string(est.size()) + " vs " +
                     std::to_string(ref.size()) + ")");
  }
  if (ref.empty()) throw InputError("si_snr: empty signals");
  const double n = static_cast<double>(ref.size());
  double me = 0.0, mr = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    me += est[i];
    mr += ref[i];
  }
  me /= n;
  mr /= n;
  double dot = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double r = ref[i] - mr;
    dot += (est[i] - me) * r;
    rr += r * r;
  }
  if (rr <= 0.0) throw InputError("si_snr: reference is silent");
  const double scale = dot / rr;
  double target = 0.0, resid = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double s = scale * (ref[i] - mr);
    const double e = (est[i] - me) - s;
    target += s * s;
    resid += e * e;
  }
  if (target <= 0.0) return -kSiSnrCeiling;
  if (resid <= 0.0) return kSiSnrCeiling;
  return std::clamp(10.0 * std::log10(target / resid), -kSiSnrCeiling, kSiSnrCeiling);
}

double log_spectral_distance(const std::vector<float>& est, const std::vector<float>& ref) {
  if (est.size() != ref.size()) throw InputError("lsd: length mismatch");
  const dsp::DspConfig cfg;
  const dsp::Spectrogram a = dsp::stft(est, cfg);
  const dsp::Spectrogram b = dsp::stft(ref, cfg);
  constexpr double kFloor = 1e-10;
  double total = 0.0;
  for (std::size_t t = 0; t < a.frames; ++t) {
    double acc = 0.0;
    for (std::size_t f = 0; f < a.bins; ++f) {
      const double pa = std::norm(std::complex<double>(a.at(t, f).real(), a.at(t, f).imag()));
      const double pb = std::norm(std::complex<double>(b.at(t, f).real(), b.at(t, f).imag()));
      const double d = 10.0 * std::log10(pa + kFloor) - 10.0 * std::log10(pb + kFloor);
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(a.bins));
  }
  return total / static_cast<double>(a.frames);
}

}  // namespace labnet::metrics
