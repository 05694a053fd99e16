// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/train/augment.hpp"

#include <algorithm>
#include <numeric>

#include "labnet/common.hpp"

namespace labnet::train {

ChannelDraw draw_channels(Rng& rng, std::size_t available, const ChannelRange& range) {
  if (available == 0) throw InputError("augment: recording has no channels");
  if (range.min < 1 || range.min > range.max) {
    throw ConfigError("augment: channel range must satisfy 1 <= min <= max");
  }
  const std::size_t ref = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(available) - 1));
  const std::size_t hi = std::min(range.max, available);
  const std::size_t lo = std::min(range.min, hi);
  const std::size_t count = static_cast<std::size_t>(
      uniform_int(rng, static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));

  std::vector<std::size_t> others;
  for (std::size_t c = 0; c < available; ++c) {
    if (c != ref) others.push_back(c);
  }
  // Fisher-Yates on our own uniform_int so the draw is library-independent.
  for (std::size_t i = others.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1));
    std::swap(others[i - 1], others[j]);
  }
  ChannelDraw d;
  d.channels.push_back(ref);
  d.channels.insert(d.channels.end(), others.begin(), others.begin() + static_cast<long>(count - 1));
  return d;
}

sim::MultichannelRecording select_channels(const sim::MultichannelRecording& rec, const ChannelDraw& draw) {
  sim::MultichannelRecording out;
  out.scene = rec.scene;
  auto pick = [&](const auto& src, auto& dst) {
    if (src.empty()) return;
    for (std::size_t c : draw.channels) {
      if (c >= src.size()) throw ContractError("select_channels: channel index out of range");
      dst.push_back(src[c]);
    }
  };
  pick(rec.noisy, out.noisy);
  pick(rec.reverberant, out.reverberant);
  pick(rec.noise, out.noise);
  pick(rec.rirs, out.rirs);
  if (out.scene.mics.size() == rec.num_mics()) {
    out.scene.mics.clear();
    for (std::size_t c : draw.channels) out.scene.mics.push_back(rec.scene.mics[c]);
  }
  return out;
}

std::vector<sim::MultichannelRecording> augment(const std::vector<sim::MultichannelRecording>& batch,
                                                Rng& rng, const ChannelRange& range) {
  std::vector<sim::MultichannelRecording> out;
  out.reserve(batch.size());
  for (const auto& rec : batch) out.push_back(select_channels(rec, draw_channels(rng, rec.num_mics(), range)));
  return out;
}

}  // namespace labnet::train
