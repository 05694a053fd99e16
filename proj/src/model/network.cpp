// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/model/network.hpp"

#include "labnet/common.hpp"

namespace labnet::model {

using nn::Shape;

template <typename Real>
Network<Real>::Network(const ModelParams& params, bool trainable)
    : hyper_(params.hyper()), names_(params.names()) {
  for (const std::string& name : names_) {
    nn::Tensor<Real> value = params.at(name).template cast<Real>();
    vars_.emplace(name, trainable ? nn::parameter(std::move(value)) : nn::constant(std::move(value)));
  }
}

template <typename Real>
const typename Network<Real>::Var& Network<Real>::param(const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw ContractError("network has no parameter '" + name + "'");
  return it->second;
}

template <typename Real>
void Network<Real>::export_to(ModelParams& params) const {
  for (const std::string& name : names_) params.at(name) = param(name)->value.template cast<float>();
}

template <typename Real>
void Network<Real>::zero_grad() {
  for (auto& [name, v] : vars_) v->zero_grad();
}

template <typename Real>
typename Network<Real>::Var Network<Real>::linear(Tape* tape, const std::string& name,
                                                  const Var& x) const {
  return nn::linear(tape, x, param(name + ".w"), param(name + ".b"));
}

template <typename Real>
typename Network<Real>::Var Network<Real>::norm(Tape* tape, const std::string& name,
                                                const Var& x) const {
  return nn::layer_norm(tape, x, param(name + ".g"), param(name + ".b"));
}

template <typename Real>
nn::GruWeights<Real> Network<Real>::gru_weights(const std::string& name) const {
  return {param(name + ".w_ih"), param(name + ".w_hh"), param(name + ".b_ih"),
          param(name + ".b_hh")};
}

template <typename Real>
typename Network<Real>::Var Network<Real>::conv(Tape* tape, const std::string& name,
                                                const Var& x, std::size_t stride,
                                                NetState<Real>* state) const {
  if (!state) {
    return nn::conv2d_causal(tape, x, param(name + ".w"), param(name + ".b"), stride,
                             hyper_.pad_f(), static_cast<const nn::Tensor<Real>*>(nullptr),
                             static_cast<nn::Tensor<Real>*>(nullptr));
  }
  const std::string key = name + ".hist";
  nn::Tensor<Real> history;
  const nn::Tensor<Real>* hist_ptr = nullptr;
  if (auto it = state->buffers.find(key); it != state->buffers.end()) {
    history = it->second;
    hist_ptr = &history;
  }
  nn::Tensor<Real> next;
  Var y = nn::conv2d_causal(tape, x, param(name + ".w"), param(name + ".b"), stride,
                            hyper_.pad_f(), hist_ptr, &next);
  state->buffers[key] = std::move(next);
  return y;
}

template <typename Real>
typename Network<Real>::Var Network<Real>::encode(Tape* tape, const Var& features,
                                                  NetState<Real>* state) const {
  const Shape& s = features->value.shape();
  if (s.size() != 4 || s[2] != hyper_.num_bins || s[3] != 3 || s[0] == 0) {
    throw ContractError("encode: features must be [C, T, " + std::to_string(hyper_.num_bins) +
                        ", 3], got " + nn::shape_str(s));
  }
  Var h = nn::silu(tape, conv(tape, "enc.conv1", features, 2, state));
  return nn::silu(tape, conv(tape, "enc.conv2", h, 2, state));
}

template <typename Real>
typename Network<Real>::Var Network<Real>::dpr(Tape* tape, const std::string& p, const Var& h,
                                               NetState<Real>* state) const {
  const std::size_t N = h->value.dim(0), T = h->value.dim(1), F = h->value.dim(2),
                    D = h->value.dim(3);

  // Frequency path: every frame is an independent sequence over bins.
  Var x = nn::reshape(tape, h, Shape{N * T, F, D});
  Var fw = nn::gru(tape, x, gru_weights(p + ".fgru_fwd"), static_cast<const nn::Tensor<Real>*>(nullptr), false, static_cast<nn::Tensor<Real>*>(nullptr));
  Var bw = nn::gru(tape, x, gru_weights(p + ".fgru_bwd"), static_cast<const nn::Tensor<Real>*>(nullptr), true, static_cast<nn::Tensor<Real>*>(nullptr));
  Var f = norm(tape, p + ".fnorm", linear(tape, p + ".fproj", nn::concat_last(tape, fw, bw)));
  Var h1 = nn::add(tape, h, nn::reshape(tape, f, Shape{N, T, F, D}));

  // Time path: one causal sequence per (mic, bin).
  Var xt = nn::reshape(tape, nn::permute(tape, h1, {0, 2, 1, 3}), Shape{N * F, T, D});
  const std::string key = p + ".tgru.h";
  nn::Tensor<Real> h0;
  const nn::Tensor<Real>* h0_ptr = nullptr;
  nn::Tensor<Real> final_state;
  if (state) {
    if (auto it = state->buffers.find(key); it != state->buffers.end()) {
      if (it->second.size() != N * F * hyper_.time_hidden) {
        throw ContractError("dpr: stored state for " + p + " does not match channel count");
      }
      h0 = it->second;
      h0_ptr = &h0;
    }
  }
  Var g = nn::gru(tape, xt, gru_weights(p + ".tgru"), h0_ptr, false, state ? &final_state : nullptr);
  if (state) state->buffers[key] = std::move(final_state);
  Var t = norm(tape, p + ".tnorm", linear(tape, p + ".tproj", g));
  t = nn::permute(tape, nn::reshape(tape, t, Shape{N, F, T, D}), {0, 2, 1, 3});
  Var h2 = nn::add(tape, h1, t);

  // ConvGLU with pointwise branches.
  Var a = linear(tape, p + ".glu_a", h2);
  Var gate = nn::sigmoid(tape, linear(tape, p + ".glu_b", h2));
  return nn::add(tape, h2, nn::mul(tape, a, gate));
}

template <typename Real>
typename Network<Real>::Var Network<Real>::cca(Tape* tape, const std::string& p,
                                               const Var& h) const {
  const std::size_t N = h->value.dim(0), T = h->value.dim(1), F = h->value.dim(2),
                    D = h->value.dim(3);
  Var ln = norm(tape, p + ".cca.norm", h);
  Var q = nn::reshape(tape, nn::slice0(tape, ln, 0), Shape{T * F, 1, D});
  Var kv = nn::permute(tape, nn::reshape(tape, ln, Shape{N, T * F, D}), {1, 0, 2});
  nn::MhaWeights<Real> w{param(p + ".cca.q.w"), param(p + ".cca.q.b"),
                         param(p + ".cca.k.w"), param(p + ".cca.k.b"),
                         param(p + ".cca.v.w"), param(p + ".cca.v.b"),
                         param(p + ".cca.out.w"), param(p + ".cca.out.b")};
  Var o = nn::mha(tape, q, kv, kv, w, hyper_.heads);
  return nn::add(tape, nn::reshape(tape, o, Shape{1, T, F, D}), nn::slice0(tape, h, 0));
}

template <typename Real>
typename Network<Real>::Var Network<Real>::tac(Tape* tape, const std::string& p,
                                               const Var& h) const {
  Var z = nn::silu(tape, linear(tape, p + ".tac.in", h));
  Var g = nn::silu(tape, linear(tape, p + ".tac.avg", nn::mean0(tape, z)));
  Var cat = nn::concat_last(tape, nn::slice0(tape, z, 0), g);
  return nn::add(tape, nn::slice0(tape, h, 0), linear(tape, p + ".tac.out", cat));
}

template <typename Real>
typename Network<Real>::Var Network<Real>::aggregate(Tape* tape, const std::string& p,
                                                     const Var& h) const {
  return hyper_.aggregator == Aggregator::kCca ? cca(tape, p, h) : tac(tape, p, h);
}

template <typename Real>
typename Network<Real>::Var Network<Real>::three_stage(Tape* tape, const Var& h_e,
                                                       NetState<Real>* state) const {
  Var h1 = h_e;
  Var hr;
  if (hyper_.stage1) {
    h1 = dpr(tape, "s1.dpr", h_e, state);
    hr = aggregate(tape, "s1", h1);
  } else {
    hr = nn::slice0(tape, h_e, 0);
  }
  Var h2 = hr;
  if (hyper_.stage2) {
    // Pairs (reference-fused, channel) for every channel including the reference.
    Var fused = linear(tape, "s2.fuse", nn::concat_last(tape, hr, h1));
    h2 = aggregate(tape, "s2", dpr(tape, "s2.dpr", fused, state));
  }
  return hyper_.stage3 ? dpr(tape, "s3.dpr", h2, state) : h2;
}

template <typename Real>
typename Network<Real>::Var Network<Real>::decode_mask(Tape* tape, const Var& h,
                                                       NetState<Real>* state) const {
  const std::size_t T = h->value.dim(1);
  Var u = nn::silu(tape, conv(tape, "dec.conv1", nn::upsample_freq(tape, h), 1, state));
  Var m = conv(tape, "dec.conv2", nn::upsample_freq(tape, u), 1, state);
  return nn::sigmoid(tape, nn::reshape(tape, m, Shape{T, hyper_.num_bins}));
}

template <typename Real>
typename Network<Real>::Var Network<Real>::forward(Tape* tape, const Var& features,
                                                   NetState<Real>* state) const {
  return decode_mask(tape, three_stage(tape, encode(tape, features, state), state), state);
}

template class Network<float>;
template class Network<double>;

}  // namespace labnet::model
