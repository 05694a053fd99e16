// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "labnet/sim/room.hpp"
#include "labnet/util/random.hpp"

namespace labnet::sim {

struct SceneConstraints {
  double length_min = 5.0, length_max = 10.0;
  double width_min = 5.0, width_max = 10.0;
  double height_min = 3.0, height_max = 4.0;
  double t60_min = 0.1, t60_max = 0.5;
  double wall_margin = 0.5;
  std::size_t noise_min = 1, noise_max = 3;
  double snr_min = -5.0, snr_max = 15.0;
  std::size_t num_mics = 6;

  void validate() const;
};

struct Scene {
  RoomSpec room;
  Vec3 source{};
  std::vector<Vec3> mics;
  std::vector<Vec3> noises;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

// Uniform room, T60, SNR and noise count; every source and microphone at
// least wall_margin from each wall.
Scene sample_scene(Rng& rng, const SceneConstraints& constraints);

// Additive decomposition, one waveform per microphone: noisy = reverberant + noise.
struct MultichannelRecording {
  std::vector<std::vector<float>> noisy;
  std::vector<std::vector<float>> reverberant;
  std::vector<std::vector<float>> noise;
  std::vector<std::vector<double>> rirs;  // source -> mic c
  Scene scene;

  std::size_t num_mics() const { return noisy.size(); }
  std::size_t length() const { return noisy.empty() ? 0 : noisy[0].size(); }
};

struct MixOptions {
  int sample_rate = 16000;
  // Channel on which the SNR is set between reverberant speech and the summed
  // reverberant noise.
  std::size_t snr_channel = 0;
  RirOptions rir;
};

// y_c = clean * h_c(source); n_c = g * sum_k noise_k * h_c(noise_k) with g
// chosen so SNR(y_ref, n_ref) = scene.snr_db; x_c = y_c + n_c. Outputs have
// the clean signal's length; shorter noises are tiled.
MultichannelRecording mix_scene(const std::vector<float>& clean,
                                const std::vector<std::vector<float>>& noises, const Scene& scene,
                                const MixOptions& opt = {});

double energy(const std::vector<float>& x);
double snr_db(const std::vector<float>& signal, const std::vector<float>& noise);

}  // namespace labnet::sim
