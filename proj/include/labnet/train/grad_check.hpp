// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Central-difference verification of the backward passes, in double.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "labnet/model/hyper.hpp"

namespace labnet::train {

struct GradCheckConfig {
  double eps = 1e-5;
  std::size_t per_tensor = 20;  // coordinates sampled per tensor (all if fewer)
  std::size_t channels = 2;
  std::size_t frames = 4;
  std::uint64_t seed = 1;
  // Distance of the synthetic targets from the initial network output.
  double residual = 0.05;
};

struct TensorCheck {
  std::string name;
  std::size_t checked = 0;
  double max_rel = 0.0;
  double max_abs = 0.0;
};

struct GradCheckResult {
  double max_rel = 0.0;
  std::string worst;  // "tensor[index]"
  std::size_t checked = 0;
  std::vector<TensorCheck> tensors;
};

// |a - n| / max(|a|, |n|, floor) with a the analytic and n the numeric value.
inline constexpr double kRelFloor = 1e-7;
double relative_error(double analytic, double numeric);

// Full network (random weights, random features and targets) through the
// mask loss. hyper.num_bins sets the input width; small values keep it fast.
GradCheckResult grad_check(const model::ModelHyper& hyper, const GradCheckConfig& cfg = {});

// One linear layer under a squared-error loss; exact up to rounding.
GradCheckResult grad_check_linear(const GradCheckConfig& cfg = {});

// The network used by grad_check: toy sizes on a 65-bin input.
model::ModelHyper grad_check_hyper();

struct EpsPoint {
  double eps = 0.0;
  double max_rel = 0.0;
};
std::vector<EpsPoint> eps_sweep(const model::ModelHyper& hyper, const std::vector<double>& eps,
                                GradCheckConfig cfg = {});

nlohmann::json to_json(const GradCheckResult& r);

}  // namespace labnet::train
