// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "labnet/sim/scene.hpp"
#include "labnet/util/random.hpp"

namespace labnet::train {

struct ChannelRange {
  std::size_t min = 1;
  std::size_t max = 6;
};

// Channel selection drawn for one training sample: channels[0] is the
// original index of the microphone used as reference.
struct ChannelDraw {
  std::vector<std::size_t> channels;
};

// Reference uniform over all channels, then C uniform over the range
// (capped at the available count), then the other C - 1 channels in random
// order.
ChannelDraw draw_channels(Rng& rng, std::size_t available, const ChannelRange& range);

// Applies a draw: noisy/reverberant/noise are reordered so the chosen
// reference becomes channel 0.
sim::MultichannelRecording select_channels(const sim::MultichannelRecording& rec,
                                           const ChannelDraw& draw);

std::vector<sim::MultichannelRecording> augment(const std::vector<sim::MultichannelRecording>& batch,
                                                Rng& rng, const ChannelRange& range);

}  // namespace labnet::train
