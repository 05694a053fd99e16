// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Differentiable ops. Each takes an optional Tape; with tape == nullptr (or
// no input requiring gradients) the op only evaluates.
//
// Feature maps are channel-last: [N, T, F, D] with N the microphone axis,
// T frames, F frequency bins and D hidden units.

#pragma once

#include <cstddef>
#include <vector>

#include "labnet/nn/autograd.hpp"
#include "labnet/nn/tensor.hpp"

namespace labnet::nn {

// y = x W + b over the last axis. x: [..., Din], W: [Din, Dout], b: [Dout] or null.
template <typename Real>
Var<Real> linear(Tape<Real>* tape, const Var<Real>& x, const Var<Real>& w, const Var<Real>& b);

template <typename Real>
Var<Real> add(Tape<Real>* tape, const Var<Real>& a, const Var<Real>& b);

template <typename Real>
Var<Real> mul(Tape<Real>* tape, const Var<Real>& a, const Var<Real>& b);

template <typename Real>
Var<Real> sigmoid(Tape<Real>* tape, const Var<Real>& x);

template <typename Real>
Var<Real> silu(Tape<Real>* tape, const Var<Real>& x);

// Sum of all elements -> shape [1].
template <typename Real>
Var<Real> sum(Tape<Real>* tape, const Var<Real>& x);

// Normalises the last axis (eps 1e-5), then gamma * xhat + beta.
template <typename Real>
Var<Real> layer_norm(Tape<Real>* tape, const Var<Real>& x, const Var<Real>& gamma,
                     const Var<Real>& beta);

template <typename Real>
Var<Real> reshape(Tape<Real>* tape, const Var<Real>& x, Shape shape);

// out.shape[i] = x.shape[perm[i]].
template <typename Real>
Var<Real> permute(Tape<Real>* tape, const Var<Real>& x, const std::vector<std::size_t>& perm);

// x[index : index + 1] along axis 0.
template <typename Real>
Var<Real> slice0(Tape<Real>* tape, const Var<Real>& x, std::size_t index);

// Mean over axis 0, keeping it as size 1.
template <typename Real>
Var<Real> mean0(Tape<Real>* tape, const Var<Real>& x);

// Concatenates along the last axis. a's axis 0 may be 1 and is then
// broadcast against b's axis 0.
template <typename Real>
Var<Real> concat_last(Tape<Real>* tape, const Var<Real>& a, const Var<Real>& b);

// GRU weights, gate blocks ordered (reset, update, candidate):
//   r = sigmoid(x W_ir + b_ir + h W_hr + b_hr)
//   z = sigmoid(x W_iz + b_iz + h W_hz + b_hz)
//   n = tanh(x W_in + b_in + r * (h W_hn + b_hn))
//   h' = (1 - z) * n + z * h
// w_ih: [I, 3H], w_hh: [H, 3H], b_ih, b_hh: [3H].
template <typename Real>
struct GruWeights {
  Var<Real> w_ih, w_hh, b_ih, b_hh;
  std::size_t hidden() const { return w_hh->value.dim(0); }
};

// Runs S independent sequences. x: [S, L, I] -> [S, L, H]. h0: [S, H] or
// null (zeros). reverse walks each sequence from L-1 to 0. The state after
// the last processed step is written to final_state when non-null.
template <typename Real>
Var<Real> gru(Tape<Real>* tape, const Var<Real>& x, const GruWeights<Real>& w,
              const Tensor<Real>* h0, bool reverse, Tensor<Real>* final_state);

// Causal 2-D convolution over (time, frequency), channel-last.
// x: [N, T, F, Cin], w: [kt, kf, Cin, Cout], b: [Cout].
// Time is padded with kt-1 leading frames taken from `history`
// ([N, kt-1, F, Cin]) or zeros; frequency is padded symmetrically by pad_f.
// The last kt-1 input frames (including history) go to history_out.
template <typename Real>
Var<Real> conv2d_causal(Tape<Real>* tape, const Var<Real>& x, const Var<Real>& w,
                        const Var<Real>& b, std::size_t stride_f, std::size_t pad_f,
                        const Tensor<Real>* history, Tensor<Real>* history_out);

// Zero insertion along the frequency axis: [N, T, F, C] -> [N, T, 2F-1, C].
template <typename Real>
Var<Real> upsample_freq(Tape<Real>* tape, const Var<Real>& x);

// Scaled dot-product attention split into `heads` heads, without projections.
// q: [B, Lq, D], k, v: [B, Lk, D] -> [B, Lq, D].
template <typename Real>
Var<Real> attention(Tape<Real>* tape, const Var<Real>& q, const Var<Real>& k,
                    const Var<Real>& v, std::size_t heads);

// Multi-head attention with input and output projections:
//   out = attention(Q Wq + bq, K Wk + bk, V Wv + bv) Wo + bo
template <typename Real>
struct MhaWeights {
  Var<Real> wq, bq, wk, bk, wv, bv, wo, bo;
};

template <typename Real>
Var<Real> mha(Tape<Real>* tape, const Var<Real>& q, const Var<Real>& k, const Var<Real>& v,
              const MhaWeights<Real>& w, std::size_t heads);

}  // namespace labnet::nn
