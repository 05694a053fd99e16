// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/sim/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "labnet/common.hpp"

namespace labnet::sim {

namespace {

std::size_t num_samples(double seconds, int fs) {
  if (!(seconds > 0.0) || fs <= 0) throw InputError("synth: duration and rate must be positive");
  return static_cast<std::size_t>(std::llround(seconds * fs));
}

double formant_gain(double f, const std::array<double, 3>& formants) {
  double g = 0.0;
  for (double fc : formants) {
    const double bw = 0.12 * fc + 60.0;
    const double x = (f - fc) / bw;
    g += 1.0 / (1.0 + x * x);
  }
  return g;
}

}  // namespace

std::vector<float> synth_speech(Rng& rng, double seconds, int fs) {
  const std::size_t n = num_samples(seconds, fs);
  std::vector<double> out(n, 0.0);
  const double f0_base = uniform(rng, 100.0, 200.0);
  const double glide_rate = uniform(rng, 0.3, 1.2);
  const double syll_rate = uniform(rng, 3.0, 6.0);
  const double syll_phase = uniform(rng, 0.0, 2.0 * kPi);
  std::array<double, 3> formants{uniform(rng, 300.0, 800.0), uniform(rng, 900.0, 2200.0),
                                 uniform(rng, 2300.0, 3200.0)};
  const double formant_rate = uniform(rng, 0.5, 2.0);

  // Pause mask: one or two silent gaps of ~150-300 ms.
  std::vector<double> gate(n, 1.0);
  const int pauses = static_cast<int>(uniform_int(rng, 1, 2));
  for (int p = 0; p < pauses; ++p) {
    const double centre = uniform(rng, 0.2, 0.8) * static_cast<double>(n);
    const double half = uniform(rng, 0.075, 0.15) * fs;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = std::abs(static_cast<double>(i) - centre) / half;
      if (d < 1.0) gate[i] *= 0.5 - 0.5 * std::cos(kPi * d);
    }
  }

  double phase = 0.0;
  const int max_harm = 40;
  std::vector<double> hphase(max_harm + 1);
  for (auto& p : hphase) p = uniform(rng, 0.0, 2.0 * kPi);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double f0 = std::clamp(f0_base * (1.0 + 0.2 * std::sin(2.0 * kPi * glide_rate * t)), 90.0, 250.0);
    phase += 2.0 * kPi * f0 / fs;
    // Formants drift slowly to imitate changing vowels.
    const double drift = 1.0 + 0.15 * std::sin(2.0 * kPi * formant_rate * t);
    const std::array<double, 3> fm{formants[0] * drift, formants[1] / drift, formants[2]};
    double s = 0.0;
    for (int h = 1; h <= max_harm; ++h) {
      const double fh = h * f0;
      if (fh > 0.45 * fs) break;
      s += formant_gain(fh, fm) / std::sqrt(static_cast<double>(h)) * std::sin(h * phase + hphase[h]);
    }
    const double am = 0.55 + 0.45 * std::sin(2.0 * kPi * syll_rate * t + syll_phase);
    out[i] = s * am * am * gate[i];
  }
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  std::vector<float> result(n);
  const double scale = peak > 0.0 ? 0.5 / peak : 0.0;
  for (std::size_t i = 0; i < n; ++i) result[i] = static_cast<float>(out[i] * scale);
  return result;
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "white") return NoiseKind::kWhite;
  if (name == "pink") return NoiseKind::kPink;
  if (name == "babble") return NoiseKind::kBabble;
  if (name == "hum") return NoiseKind::kHum;
  throw ConfigError("unknown noise kind '" + name + "' (white, pink, babble, hum)");
}

const char* noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kBabble: return "babble";
    case NoiseKind::kHum: return "hum";
  }
  return "?";
}

std::vector<float> synth_noise(Rng& rng, NoiseKind kind, double seconds, int fs) {
  const std::size_t n = num_samples(seconds, fs);
  std::vector<double> x(n, 0.0);
  switch (kind) {
    case NoiseKind::kWhite:
      for (auto& v : x) v = normal(rng);
      break;
    case NoiseKind::kPink: {
      // Paul Kellet's economy pink filter.
      double b0 = 0, b1 = 0, b2 = 0;
      for (auto& v : x) {
        const double w = normal(rng);
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        v = b0 + b1 + b2 + w * 0.1848;
      }
      break;
    }
    case NoiseKind::kBabble: {
      const int talkers = static_cast<int>(uniform_int(rng, 4, 6));
      for (int k = 0; k < talkers; ++k) {
        const auto s = synth_speech(rng, seconds, fs);
        for (std::size_t i = 0; i < n; ++i) x[i] += s[i];
      }
      break;
    }
    case NoiseKind::kHum: {
      const double f = uniform(rng, 50.0, 120.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        for (int h = 1; h <= 8; ++h) x[i] += std::sin(2.0 * kPi * f * h * t) / h;
        x[i] += 0.1 * normal(rng);
      }
      break;
    }
  }
  double e = 0.0;
  for (double v : x) e += v * v;
  const double scale = e > 0.0 ? 1.0 / std::sqrt(e / static_cast<double>(n)) : 0.0;
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(x[i] * scale);
  return out;
}

}  // namespace labnet::sim
