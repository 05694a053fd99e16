// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "labnet/model/hyper.hpp"
#include "labnet/nn/tensor.hpp"

namespace labnet::model {

struct ParamSpec {
  std::string name;
  nn::Shape shape;
  enum class Init { kUniform, kOnes, kZeros } init;
  std::size_t fan_in;
};

// Every learnable tensor implied by `hyper`, in canonical order. Per-channel
// paths share one entry each, so the list never depends on the channel count.
std::vector<ParamSpec> param_specs(const ModelHyper& hyper);

// Named float32 weights plus the hyper block they were built for.
class ModelParams {
 public:
  ModelParams() = default;
  // Deterministic initialisation: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for
  // weights and biases, gamma = 1 and beta = 0 for layer norms.
  ModelParams(const ModelHyper& hyper, std::uint64_t seed);

  const ModelHyper& hyper() const { return hyper_; }
  const std::vector<std::string>& names() const { return names_; }
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const nn::Tensor<float>& at(const std::string& name) const;
  nn::Tensor<float>& at(const std::string& name);
  std::size_t count() const;

  // Used by the loader; validates against param_specs().
  static ModelParams from_tensors(const ModelHyper& hyper,
                                  std::map<std::string, nn::Tensor<float>> tensors);

 private:
  ModelHyper hyper_;
  std::vector<std::string> names_;
  std::map<std::string, nn::Tensor<float>> tensors_;
};

std::size_t count_params(const ModelParams& params);

// Analytic multiply-accumulate count of `seconds` of audio at C microphones
// (sample rate and hop as in the default DSP config unless given).
double count_macs(const ModelHyper& hyper, std::size_t channels, double seconds = 1.0,
                  double frames_per_second = 16000.0 / 256.0);

struct MacBreakdown {
  double per_channel = 0.0;  // slope in C, per frame
  double shared = 0.0;       // intercept, per frame
};
MacBreakdown mac_breakdown(const ModelHyper& hyper);

}  // namespace labnet::model
