// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// LABNet forward graph. Tensors are channel-last, [N, T, F, D], with N the
// microphone axis (index 0 = reference).
//
//   features [C, T, 257, 3]
//     -> encoder: 2 causal convs (freq stride 2) + SiLU     -> h_e [C, T, F', D]
//     -> stage 1: shared DPR per channel, CCA               -> h_r [1, T, F', D]
//     -> stage 2: [h_r, h_c] -> shared linear + DPR, CCA    -> [1, T, F', D]
//     -> stage 3: DPR                                       -> [1, T, F', D]
//     -> decoder: 2x (zero-insert upsample, causal conv)   -> mask [T, 257]

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "labnet/model/hyper.hpp"
#include "labnet/model/params.hpp"
#include "labnet/nn/autograd.hpp"
#include "labnet/nn/ops.hpp"

namespace labnet::model {

// Recurrent state carried across calls for frame-by-frame inference:
// conv time histories and temporal-GRU hidden states, keyed by layer name.
// An empty map is the all-zero initial state.
template <typename Real>
struct NetState {
  std::map<std::string, nn::Tensor<Real>> buffers;
  void reset() { buffers.clear(); }
};

template <typename Real>
class Network {
 public:
  using Var = nn::Var<Real>;
  using Tape = nn::Tape<Real>;

  // trainable = true marks every weight as requiring gradients.
  Network(const ModelParams& params, bool trainable);

  const ModelHyper& hyper() const { return hyper_; }
  const Var& param(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }

  // Copies the current weight values back (used after optimizer steps).
  void export_to(ModelParams& params) const;
  void zero_grad();

  // features: [C, T, num_bins, 3]. state may be null (fresh sequence).
  Var encode(Tape* tape, const Var& features, NetState<Real>* state) const;
  Var dpr(Tape* tape, const std::string& prefix, const Var& h, NetState<Real>* state) const;
  // [C, T, F', D] -> [1, T, F', D]
  Var aggregate(Tape* tape, const std::string& prefix, const Var& h) const;
  Var cca(Tape* tape, const std::string& prefix, const Var& h) const;
  Var tac(Tape* tape, const std::string& prefix, const Var& h) const;
  Var three_stage(Tape* tape, const Var& h_e, NetState<Real>* state) const;
  // [1, T, F', D] -> mask [T, num_bins] in (0, 1).
  Var decode_mask(Tape* tape, const Var& h, NetState<Real>* state) const;

  Var forward(Tape* tape, const Var& features, NetState<Real>* state) const;

 private:
  Var conv(Tape* tape, const std::string& name, const Var& x, std::size_t stride,
           NetState<Real>* state) const;
  Var linear(Tape* tape, const std::string& name, const Var& x) const;
  Var norm(Tape* tape, const std::string& name, const Var& x) const;
  nn::GruWeights<Real> gru_weights(const std::string& name) const;

  ModelHyper hyper_;
  std::vector<std::string> names_;
  std::map<std::string, Var> vars_;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace labnet::model
