// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdlib>

#include "labnet/baselines/beamformers.hpp"
#include "labnet/common.hpp"

namespace labnet::baselines {

std::vector<float> delay_and_sum(const std::vector<std::vector<float>>& noisy,
                                 const std::vector<long>& delays) {
  if (noisy.empty()) throw InputError("delay_and_sum: no channels");
  if (delays.size() != noisy.size()) throw InputError("delay_and_sum: one delay per channel required");
  const long len = static_cast<long>(noisy[0].size());
  for (std::size_t c = 0; c < noisy.size(); ++c) {
    if (static_cast<long>(noisy[c].size()) != len) throw InputError("delay_and_sum: unequal channel lengths");
    if (std::labs(delays[c]) >= len) throw InputError("delay_and_sum: delay exceeds signal length");
  }
  const double inv = 1.0 / static_cast<double>(noisy.size());
  std::vector<float> out(static_cast<std::size_t>(len));
  for (long n = 0; n < len; ++n) {
    double acc = 0.0;
    for (std::size_t c = 0; c < noisy.size(); ++c) {
      const long m = n + delays[c];
      if (m >= 0 && m < len) acc += noisy[c][static_cast<std::size_t>(m)];
    }
    out[static_cast<std::size_t>(n)] = static_cast<float>(acc * inv);
  }
  return out;
}

std::vector<long> geometric_delays(const sim::Scene& scene, int sample_rate) {
  if (scene.mics.empty()) throw InputError("geometric_delays: scene has no microphones");
  const double c = scene.room.speed_of_sound;
  const double d0 = sim::distance(scene.source, scene.mics[0]);
  std::vector<long> out;
  for (const auto& m : scene.mics) {
    out.push_back(std::lround((sim::distance(scene.source, m) - d0) / c * sample_rate));
  }
  return out;
}

}  // namespace labnet::baselines
