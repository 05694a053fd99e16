// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/model/params.hpp"

#include <cmath>
#include <random>

#include "labnet/common.hpp"

namespace labnet::model {

namespace {

using Init = ParamSpec::Init;

struct SpecBuilder {
  std::vector<ParamSpec> out;

  void weight(const std::string& name, nn::Shape shape, std::size_t fan_in) {
    out.push_back({name, std::move(shape), Init::kUniform, fan_in});
  }
  void linear(const std::string& p, std::size_t in, std::size_t o) {
    weight(p + ".w", {in, o}, in);
    weight(p + ".b", {o}, in);
  }
  void norm(const std::string& p, std::size_t d) {
    out.push_back({p + ".g", {d}, Init::kOnes, d});
    out.push_back({p + ".b", {d}, Init::kZeros, d});
  }
  void gru(const std::string& p, std::size_t in, std::size_t h) {
    weight(p + ".w_ih", {in, 3 * h}, h);
    weight(p + ".w_hh", {h, 3 * h}, h);
    weight(p + ".b_ih", {3 * h}, h);
    weight(p + ".b_hh", {3 * h}, h);
  }
  void conv(const std::string& p, std::size_t kt, std::size_t kf, std::size_t cin,
            std::size_t cout) {
    weight(p + ".w", {kt, kf, cin, cout}, kt * kf * cin);
    weight(p + ".b", {cout}, kt * kf * cin);
  }
  void dpr(const std::string& p, const ModelHyper& h) {
    const std::size_t d = h.hidden;
    gru(p + ".fgru_fwd", d, h.freq_hidden);
    gru(p + ".fgru_bwd", d, h.freq_hidden);
    linear(p + ".fproj", 2 * h.freq_hidden, d);
    norm(p + ".fnorm", d);
    gru(p + ".tgru", d, h.time_hidden);
    linear(p + ".tproj", h.time_hidden, d);
    norm(p + ".tnorm", d);
    linear(p + ".glu_a", d, d);
    linear(p + ".glu_b", d, d);
  }
  void aggregator(const std::string& p, const ModelHyper& h) {
    const std::size_t d = h.hidden;
    if (h.aggregator == Aggregator::kCca) {
      norm(p + ".cca.norm", d);
      linear(p + ".cca.q", d, d);
      linear(p + ".cca.k", d, d);
      linear(p + ".cca.v", d, d);
      linear(p + ".cca.out", d, d);
    } else {
      linear(p + ".tac.in", d, d);
      linear(p + ".tac.avg", d, d);
      linear(p + ".tac.out", 2 * d, d);
    }
  }
};

}  // namespace

std::vector<ParamSpec> param_specs(const ModelHyper& h) {
  h.validate();
  SpecBuilder b;
  const std::size_t d = h.hidden;
  b.conv("enc.conv1", h.kernel_t, h.kernel_f, 3, d);
  b.conv("enc.conv2", h.kernel_t, h.kernel_f, d, d);
  if (h.stage1) {
    b.dpr("s1.dpr", h);
    b.aggregator("s1", h);
  }
  if (h.stage2) {
    b.linear("s2.fuse", 2 * d, d);
    b.dpr("s2.dpr", h);
    b.aggregator("s2", h);
  }
  if (h.stage3) b.dpr("s3.dpr", h);
  b.conv("dec.conv1", h.kernel_t, h.kernel_f, d, d);
  b.conv("dec.conv2", h.kernel_t, h.kernel_f, d, 1);
  return b.out;
}

ModelParams::ModelParams(const ModelHyper& hyper, std::uint64_t seed) : hyper_(hyper) {
  std::mt19937_64 rng(seed);
  // 53 random bits -> [0, 1); avoids the implementation-defined distributions.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (const ParamSpec& spec : param_specs(hyper)) {
    nn::Tensor<float> t(spec.shape);
    switch (spec.init) {
      case Init::kOnes:
        t.fill(1.0f);
        break;
      case Init::kZeros:
        break;
      case Init::kUniform: {
        const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
        for (float& v : t.values()) v = static_cast<float>((2.0 * uniform() - 1.0) * bound);
        break;
      }
    }
    names_.push_back(spec.name);
    tensors_.emplace(spec.name, std::move(t));
  }
}

const nn::Tensor<float>& ModelParams::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ContractError("unknown parameter '" + name + "'");
  return it->second;
}

nn::Tensor<float>& ModelParams::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ContractError("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ModelParams::count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.size();
  return n;
}

ModelParams ModelParams::from_tensors(const ModelHyper& hyper,
                                      std::map<std::string, nn::Tensor<float>> tensors) {
  ModelParams p;
  p.hyper_ = hyper;
  for (const ParamSpec& spec : param_specs(hyper)) {
    auto it = tensors.find(spec.name);
    if (it == tensors.end()) throw CorruptModelError("missing tensor '" + spec.name + "'");
    if (it->second.shape() != spec.shape) {
      throw CorruptModelError("tensor '" + spec.name + "' has shape " +
                              nn::shape_str(it->second.shape()) + ", expected " +
                              nn::shape_str(spec.shape));
    }
    p.names_.push_back(spec.name);
    p.tensors_.emplace(spec.name, std::move(it->second));
    tensors.erase(it);
  }
  if (!tensors.empty()) {
    throw CorruptModelError("unexpected tensor '" + tensors.begin()->first + "'");
  }
  return p;
}

std::size_t count_params(const ModelParams& params) { return params.count(); }

}  // namespace labnet::model
