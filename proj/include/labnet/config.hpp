// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Command-level configuration: one JSON object with optional blocks
//
//   {
//     "seed": 0,
//     "dsp":   {"sample_rate", "win_len", "hop", "gla_iters"},
//     "model": {"hidden", "freq_hidden", "time_hidden", "kernel_t", "kernel_f",
//               "heads", "num_bins", "compress_exp", "aggregator",
//               "stage1", "stage2", "stage3"},
//     "train": {"lr0", "lr_decay", "clip_norm", "weight_decay", "epochs",
//               "batch_size", "segment_seconds", "loss_magnitude",
//               "loss_complex", "min_channels", "max_channels", "seed",
//               "validation_fraction"},
//     "sim":   {"length_min", "length_max", "width_min", "width_max",
//               "height_min", "height_max", "t60_min", "t60_max",
//               "wall_margin", "noise_min", "noise_max", "snr_min",
//               "snr_max", "num_mics", "seconds", "snr_channel"}
//   }
//
// Unknown keys at any level raise ConfigError.

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "labnet/dsp/stft.hpp"
#include "labnet/model/hyper.hpp"
#include "labnet/sim/scene.hpp"
#include "labnet/train/trainer.hpp"

namespace labnet {

struct SimSettings {
  sim::SceneConstraints scene;
  double seconds = 2.0;
  std::size_t snr_channel = 0;
};

struct RunConfig {
  std::uint64_t seed = 0;
  dsp::DspConfig dsp;
  model::ModelHyper model;
  train::TrainConfig train;
  SimSettings sim;

  // Cross-block checks (bins vs. window, compression exponent).
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

nlohmann::json dsp_to_json(const dsp::DspConfig& cfg);
dsp::DspConfig dsp_from_json(const nlohmann::json& j);
nlohmann::json sim_to_json(const SimSettings& s);
SimSettings sim_from_json(const nlohmann::json& j);

}  // namespace labnet
