// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/model/hyper.hpp"

#include "labnet/common.hpp"

namespace labnet::model {

const char* aggregator_name(Aggregator a) {
  return a == Aggregator::kCca ? "cca" : "tac";
}

namespace {
std::size_t strided(std::size_t f, std::size_t k, std::size_t pad) {
  return (f + 2 * pad - k) / 2 + 1;
}
}  // namespace

std::size_t ModelHyper::encoded_bins() const {
  return strided(strided(num_bins, kernel_f, pad_f()), kernel_f, pad_f());
}

void ModelHyper::validate() const {
  if (hidden == 0 || freq_hidden == 0 || time_hidden == 0) {
    throw ConfigError("model: hidden sizes must be positive");
  }
  if (kernel_t == 0) throw ConfigError("model: kernel_t must be >= 1");
  if (kernel_f == 0 || kernel_f % 2 == 0) throw ConfigError("model: kernel_f must be odd");
  if (heads == 0 || hidden % heads != 0) {
    throw ConfigError("model: hidden (" + std::to_string(hidden) + ") must be divisible by heads (" +
                      std::to_string(heads) + ")");
  }
  if (num_bins < 5 || num_bins % 4 != 1) {
    // Two stride-2 stages followed by two zero-insertion upsamplings must
    // land back on num_bins: F = 4k + 1.
    throw ConfigError("model: num_bins must be of the form 4k+1, got " + std::to_string(num_bins));
  }
  if (!(compress_exp > 0.0f && compress_exp <= 1.0f)) {
    throw ConfigError("model: compress_exp must lie in (0, 1]");
  }
}

ModelHyper ModelHyper::toy() {
  ModelHyper h;
  h.hidden = 8;
  h.freq_hidden = 8;
  h.time_hidden = 16;
  return h;
}

void ModelHyper::apply_ablation(std::string_view name) {
  if (name == "full" || name == "none") return;
  if (name == "no-stage1") {
    stage1 = false;
  } else if (name == "no-stage2") {
    stage2 = false;
  } else if (name == "no-stage3") {
    stage3 = false;
  } else if (name == "tac") {
    aggregator = Aggregator::kTac;
  } else {
    throw ConfigError("unknown ablation '" + std::string(name) +
                      "' (expected full, no-stage1, no-stage2, no-stage3, tac)");
  }
}

std::string ModelHyper::ablation_name() const {
  std::string s;
  auto add = [&s](const char* part) {
    if (!s.empty()) s += "+";
    s += part;
  };
  if (!stage1) add("no-stage1");
  if (!stage2) add("no-stage2");
  if (!stage3) add("no-stage3");
  if (aggregator == Aggregator::kTac) add("tac");
  return s.empty() ? "full" : s;
}

}  // namespace labnet::model
