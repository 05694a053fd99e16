// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/sim/scene.hpp"

#include <cmath>

#include "labnet/common.hpp"
#include "labnet/dsp/fft.hpp"

namespace labnet::sim {

void SceneConstraints::validate() const {
  auto range = [](double lo, double hi, const char* what) {
    if (!(lo <= hi)) throw ConfigError(std::string("sim: ") + what + " range is empty");
  };
  range(length_min, length_max, "length");
  range(width_min, width_max, "width");
  range(height_min, height_max, "height");
  range(t60_min, t60_max, "t60");
  range(snr_min, snr_max, "snr");
  if (t60_min <= 0.0) throw ConfigError("sim: t60 must be positive");
  if (noise_min < 1 || noise_min > noise_max) throw ConfigError("sim: noise count range invalid");
  if (num_mics < 1) throw ConfigError("sim: num_mics must be >= 1");
  const double smallest = std::min({length_min, width_min, height_min});
  if (!(wall_margin >= 0.0 && 2.0 * wall_margin < smallest)) {
    throw ConfigError("sim: wall margin leaves no room for placements");
  }
}

namespace {
Vec3 place(Rng& rng, const RoomSpec& room, double margin) {
  return {uniform(rng, margin, room.length - margin), uniform(rng, margin, room.width - margin),
          uniform(rng, margin, room.height - margin)};
}
}  // namespace

Scene sample_scene(Rng& rng, const SceneConstraints& k) {
  k.validate();
  Scene s;
  s.room.length = uniform(rng, k.length_min, k.length_max);
  s.room.width = uniform(rng, k.width_min, k.width_max);
  s.room.height = uniform(rng, k.height_min, k.height_max);
  s.room.t60 = uniform(rng, k.t60_min, k.t60_max);
  s.snr_db = uniform(rng, k.snr_min, k.snr_max);
  const auto noises = static_cast<std::size_t>(
      uniform_int(rng, static_cast<std::int64_t>(k.noise_min), static_cast<std::int64_t>(k.noise_max)));
  s.source = place(rng, s.room, k.wall_margin);
  for (std::size_t m = 0; m < k.num_mics; ++m) s.mics.push_back(place(rng, s.room, k.wall_margin));
  for (std::size_t n = 0; n < noises; ++n) s.noises.push_back(place(rng, s.room, k.wall_margin));
  return s;
}

double energy(const std::vector<float>& x) {
  double e = 0.0;
  for (float v : x) e += static_cast<double>(v) * v;
  return e;
}

double snr_db(const std::vector<float>& signal, const std::vector<float>& noise) {
  return 10.0 * std::log10(energy(signal) / energy(noise));
}

namespace {

std::vector<double> reverberate(const std::vector<double>& dry, const std::vector<double>& rir,
                                std::size_t len) {
  std::vector<double> wet = dsp::fft_convolve(dry, rir);
  wet.resize(len, 0.0);
  return wet;
}

}  // namespace

MultichannelRecording mix_scene(const std::vector<float>& clean,
                                const std::vector<std::vector<float>>& noises, const Scene& scene,
                                const MixOptions& opt) {
  const std::size_t len = clean.size();
  if (len == 0 || energy(clean) <= 0.0) throw InputError("mix_scene: clean signal is silent");
  if (noises.empty()) throw InputError("mix_scene: need at least one noise signal");
  if (noises.size() < scene.noises.size()) {
    throw InputError("mix_scene: scene has " + std::to_string(scene.noises.size()) +
                     " noise positions but only " + std::to_string(noises.size()) + " noise signals");
  }
  const std::size_t C = scene.mics.size();
  if (C == 0) throw InputError("mix_scene: scene has no microphones");
  if (opt.snr_channel >= C) throw InputError("mix_scene: snr channel out of range");

  RirOptions rir_opt = opt.rir;
  rir_opt.sample_rate = opt.sample_rate;
  const std::vector<double> dry(clean.begin(), clean.end());
  std::vector<std::vector<double>> dry_noise;
  for (std::size_t k = 0; k < scene.noises.size(); ++k) {
    const auto& nz = noises[k];
    if (nz.empty()) throw InputError("mix_scene: empty noise signal");
    std::vector<double> tiled(len);
    for (std::size_t i = 0; i < len; ++i) tiled[i] = nz[i % nz.size()];
    dry_noise.push_back(std::move(tiled));
  }

  MultichannelRecording rec;
  rec.scene = scene;
  std::vector<std::vector<double>> y(C), n(C, std::vector<double>(len, 0.0));
  for (std::size_t c = 0; c < C; ++c) {
    rec.rirs.push_back(simulate_rir(scene.room, scene.source, scene.mics[c], rir_opt));
    y[c] = reverberate(dry, rec.rirs.back(), len);
    for (std::size_t k = 0; k < dry_noise.size(); ++k) {
      const auto h = simulate_rir(scene.room, scene.noises[k], scene.mics[c], rir_opt);
      const auto wet = reverberate(dry_noise[k], h, len);
      for (std::size_t i = 0; i < len; ++i) n[c][i] += wet[i];
    }
  }

  rec.reverberant.assign(C, std::vector<float>(len));
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < len; ++i) rec.reverberant[c][i] = static_cast<float>(y[c][i]);
  }
  // Scale in float space so the realised SNR is measured on the stored data.
  std::vector<float> n_ref(len);
  for (std::size_t i = 0; i < len; ++i) n_ref[i] = static_cast<float>(n[opt.snr_channel][i]);
  const double ey = energy(rec.reverberant[opt.snr_channel]);
  const double en = energy(n_ref);
  const double gain = en > 0.0 ? std::sqrt(ey / (en * std::pow(10.0, scene.snr_db / 10.0))) : 0.0;

  rec.noise.assign(C, std::vector<float>(len));
  rec.noisy.assign(C, std::vector<float>(len));
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < len; ++i) {
      rec.noise[c][i] = static_cast<float>(gain * n[c][i]);
      rec.noisy[c][i] = rec.reverberant[c][i] + rec.noise[c][i];
    }
  }
  return rec;
}

}  // namespace labnet::sim
