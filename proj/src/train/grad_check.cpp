// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/train/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "labnet/common.hpp"
#include "labnet/model/network.hpp"
#include "labnet/model/params.hpp"
#include "labnet/nn/ops.hpp"
#include "labnet/train/loss.hpp"
#include "labnet/util/random.hpp"

namespace labnet::train {

using Var = nn::Var<double>;
using Tape = nn::Tape<double>;

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelFloor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

std::vector<std::size_t> sample_indices(Rng& rng, std::size_t size, std::size_t count) {
  std::vector<std::size_t> idx(size);
  for (std::size_t i = 0; i < size; ++i) idx[i] = i;
  if (count >= size) return idx;
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(i),
                                                        static_cast<std::int64_t>(size) - 1));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// loss(tape) builds the scalar; params are perturbed in place.
GradCheckResult run_check(const std::vector<std::pair<std::string, Var>>& params,
                          const std::function<Var(Tape*)>& loss, const GradCheckConfig& cfg) {
  if (!(cfg.eps > 0.0)) throw ContractError("grad_check: eps must be positive");
  for (const auto& [name, v] : params) v->zero_grad();
  {
    Tape tape;
    Var l = loss(&tape);
    tape.backward(l);
  }
  Rng rng(derive_seed(cfg.seed, 0x6c));
  GradCheckResult res;
  for (const auto& [name, v] : params) {
    TensorCheck tc;
    tc.name = name;
    for (std::size_t i : sample_indices(rng, v->value.size(), cfg.per_tensor)) {
      const double analytic = v->grad.empty() ? 0.0 : v->grad[i];
      const double orig = v->value[i];
      v->value[i] = orig + cfg.eps;
      const double up = loss(nullptr)->value[0];
      v->value[i] = orig - cfg.eps;
      const double down = loss(nullptr)->value[0];
      v->value[i] = orig;
      const double numeric = (up - down) / (2.0 * cfg.eps);
      const double rel = relative_error(analytic, numeric);
      tc.max_abs = std::max(tc.max_abs, std::abs(analytic - numeric));
      if (rel > tc.max_rel) tc.max_rel = rel;
      if (rel > res.max_rel || res.worst.empty()) {
        res.max_rel = rel;
        res.worst = name + "[" + std::to_string(i) + "]";
      }
      ++tc.checked;
    }
    res.checked += tc.checked;
    res.tensors.push_back(std::move(tc));
  }
  return res;
}

}  // namespace

model::ModelHyper grad_check_hyper() {
  model::ModelHyper h = model::ModelHyper::toy();
  h.num_bins = 65;
  return h;
}

GradCheckResult grad_check(const model::ModelHyper& hyper, const GradCheckConfig& cfg) {
  hyper.validate();
  if (cfg.channels == 0 || cfg.frames == 0) throw ContractError("grad_check: empty input");
  Rng rng(derive_seed(cfg.seed, 1));
  model::ModelParams fparams(hyper, derive_seed(cfg.seed, 2));
  model::Network<double> net(fparams, true);
  // Move norms and biases off their 1/0 initialisation so every path carries
  // a generic gradient.
  for (const auto& name : net.names()) {
    auto& t = net.param(name)->value;
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += uniform(rng, -0.1, 0.1);
  }

  const std::size_t F = hyper.num_bins;
  nn::Tensor<double> feats({cfg.channels, cfg.frames, F, 3});
  for (std::size_t i = 0; i < feats.size(); i += 3) {
    feats[i] = uniform(rng, 0.0, 1.5);
    feats[i + 1] = uniform(rng, -kPi, kPi);
    feats[i + 2] = uniform(rng, -kPi, kPi);
  }
  const Var input = nn::constant(std::move(feats));
  const auto m0 = net.forward(nullptr, input, nullptr);

  // Targets sit a small residual away from the initial estimate: the
  // roundoff in the loss scales with its value, the gradient with the
  // residual, so small residuals keep the difference quotient accurate.
  MaskTarget target;
  target.frames = cfg.frames;
  target.bins = F;
  const std::size_t n = cfg.frames * F;
  for (auto* v : {&target.noisy_mag, &target.noisy_re, &target.noisy_im, &target.clean_mag, &target.clean_re,
                  &target.clean_im}) {
    v->resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    target.noisy_mag[i] = uniform(rng, 0.2, 1.5);
    const double pn = uniform(rng, -kPi, kPi);
    target.noisy_re[i] = target.noisy_mag[i] * std::cos(pn);
    target.noisy_im[i] = target.noisy_mag[i] * std::sin(pn);
    const double m = m0->value[i];
    target.clean_mag[i] = m * target.noisy_mag[i] + cfg.residual * uniform(rng, -1.0, 1.0);
    target.clean_re[i] = m * target.noisy_re[i] + cfg.residual * uniform(rng, -1.0, 1.0);
    target.clean_im[i] = m * target.noisy_im[i] + cfg.residual * uniform(rng, -1.0, 1.0);
  }
  const LossWeights w;

  std::vector<std::pair<std::string, Var>> params;
  for (const auto& name : net.names()) params.emplace_back(name, net.param(name));
  return run_check(
      params,
      [&](Tape* tape) { return mask_loss(tape, net.forward(tape, input, nullptr), target, w); },
      cfg);
}

GradCheckResult grad_check_linear(const GradCheckConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 3));
  auto rand_tensor = [&](nn::Shape shape) {
    nn::Tensor<double> t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform(rng, -1.0, 1.0);
    return t;
  };
  const Var x = nn::constant(rand_tensor({5, 4}));
  const Var neg_y = nn::constant(rand_tensor({5, 3}));
  const Var wt = nn::parameter(rand_tensor({4, 3}));
  const Var b = nn::parameter(rand_tensor({3}));
  return run_check({{"linear.w", wt}, {"linear.b", b}},
                   [&](Tape* tape) {
                     Var d = nn::add(tape, nn::linear(tape, x, wt, b), neg_y);
                     return nn::sum(tape, nn::mul(tape, d, d));
                   },
                   cfg);
}

std::vector<EpsPoint> eps_sweep(const model::ModelHyper& hyper, const std::vector<double>& eps,
                                GradCheckConfig cfg) {
  std::vector<EpsPoint> out;
  for (double e : eps) {
    cfg.eps = e;
    out.push_back({e, grad_check(hyper, cfg).max_rel});
  }
  return out;
}

nlohmann::json to_json(const GradCheckResult& r) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& t : r.tensors) {
    tensors.push_back({{"name", t.name}, {"checked", t.checked}, {"max_rel", t.max_rel}, {"max_abs", t.max_abs}});
  }
  return {{"max_rel", r.max_rel}, {"worst", r.worst}, {"checked", r.checked}, {"tensors", tensors}};
}

}  // namespace labnet::train
