// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "labnet/dsp/stft.hpp"
#include "labnet/io/manifest.hpp"
#include "labnet/model/hyper.hpp"
#include "labnet/model/params.hpp"
#include "labnet/sim/scene.hpp"
#include "labnet/train/augment.hpp"
#include "labnet/train/loss.hpp"
#include "labnet/train/optimizer.hpp"

namespace labnet::train {

struct TrainConfig {
  double lr0 = 5e-4;
  double lr_decay = 0.98;  // per epoch
  double clip_norm = 5.0;
  double weight_decay = 1e-2;
  std::size_t epochs = 15;
  std::size_t batch_size = 4;  // utterances per optimizer step
  double segment_seconds = 4.0;
  LossWeights loss;
  ChannelRange channels{1, 6};
  std::uint64_t seed = 0;
  // Share of the manifest held out for validation (taken from the end).
  double validation_fraction = 0.2;

  void validate() const;
  double lr_at(std::size_t epoch) const;  // epoch counted from 1
};

nlohmann::json to_json(const TrainConfig& cfg);
// Unknown keys raise ConfigError; missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);

// Epoch 0 is the untrained model evaluated with epoch 0's augmentation draws.
struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN without a validation split
  double grad_norm = 0.0;  // mean pre-clip norm over applied steps
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

nlohmann::json to_json(const EpochRecord& r);
EpochRecord epoch_record_from_json(const nlohmann::json& j);

struct TrainOptions {
  // When set: last.lnp, last.opt.json, best.lnp and curve.jsonl are written
  // after every epoch.
  std::string out_dir;
  // Directory of a previous run to continue from.
  std::string resume_dir;
  // Stop after this epoch even if cfg.epochs is larger (0 = no limit).
  std::size_t stop_after = 0;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  model::ModelParams params;  // after the last epoch
  model::ModelParams best;    // lowest validation (or training) loss
  std::size_t best_epoch = 0;
  double best_loss = 0.0;
  std::vector<EpochRecord> curve;
};

// Loss of one recording (channel 0 = reference) for the given network,
// without gradients.
double recording_loss(const model::ModelParams& params, const sim::MultichannelRecording& rec,
                      const LossWeights& w, dsp::DspConfig dsp = {});

// Mean loss over the samples drawn for `epoch` (same augmentation, crops and
// order the trainer uses). With epoch 0 this reproduces curve[0].train_loss
// for the initial weights, so it compares trained and untrained weights on
// identical inputs.
double epoch_draw_loss(const model::ModelParams& params, const std::vector<sim::MultichannelRecording>& set,
                       const TrainConfig& cfg, std::size_t epoch = 0);

// Deterministic for a fixed seed. Throws NumericalError when the loss
// becomes non-finite, listing the last finite losses.
TrainResult train_toy(const std::vector<sim::MultichannelRecording>& train_set,
                      const std::vector<sim::MultichannelRecording>& val_set,
                      const model::ModelHyper& hyper, const TrainConfig& cfg,
                      const TrainOptions& opts = {});

// Loads the manifest and splits it by cfg.validation_fraction.
TrainResult train_toy(const std::vector<io::ManifestEntry>& manifest, const std::string& base_dir,
                      const model::ModelHyper& hyper, const TrainConfig& cfg,
                      const TrainOptions& opts = {});

}  // namespace labnet::train
