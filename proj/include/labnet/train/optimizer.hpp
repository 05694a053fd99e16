// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace labnet::train {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
  double clip_norm = 5.0;  // global L2 norm; <= 0 disables clipping

  void validate() const;
};

// A named float parameter and its gradient (same length).
struct ParamSlot {
  std::string name;
  float* value = nullptr;
  const float* grad = nullptr;  // null means zero gradient
  std::size_t size = 0;
};

struct StepReport {
  bool applied = false;
  double grad_norm = 0.0;    // before clipping
  double clip_scale = 1.0;   // factor applied to every gradient
  std::string rejected;      // reason when not applied
};

// Global-norm clipping factor: min(1, clip / norm).
double clip_scale(double grad_norm, double clip_norm);

// Decoupled weight decay Adam. Moments are kept in double and keyed by
// parameter name, so the slot order may change between steps.
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {});

  const AdamWConfig& config() const { return cfg_; }
  std::size_t steps() const { return step_; }

  // Non-finite gradients reject the whole step and leave state untouched.
  StepReport step(const std::vector<ParamSlot>& params, double lr);

  nlohmann::json state_json() const;
  void load_state_json(const nlohmann::json& j);

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  AdamWConfig cfg_;
  std::size_t step_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace labnet::train
