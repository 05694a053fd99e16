// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace labnet::model {

enum class Aggregator { kCca, kTac };

const char* aggregator_name(Aggregator a);

// Architecture hyperparameters. Everything here is independent of the
// microphone count.
struct ModelHyper {
  std::size_t hidden = 16;       // D, embedding width carried between blocks
  std::size_t freq_hidden = 16;  // per direction of the frequency Bi-GRU
  std::size_t time_hidden = 48;  // temporal GRU
  std::size_t kernel_t = 2;      // causal conv extent along time
  std::size_t kernel_f = 5;      // conv extent along frequency (odd)
  std::size_t heads = 4;
  std::size_t num_bins = 257;
  float compress_exp = 0.3f;
  Aggregator aggregator = Aggregator::kCca;
  bool stage1 = true;
  bool stage2 = true;
  bool stage3 = true;

  // Frequency bins after the two stride-2 encoder convolutions.
  std::size_t encoded_bins() const;
  std::size_t pad_f() const { return kernel_f / 2; }

  void validate() const;

  // Small configuration used by smoke training and gradient checks.
  static ModelHyper toy();

  // "full", "no-stage1", "no-stage2", "no-stage3" or "tac". Throws
  // ConfigError on anything else.
  void apply_ablation(std::string_view name);
  std::string ablation_name() const;
};

}  // namespace labnet::model
