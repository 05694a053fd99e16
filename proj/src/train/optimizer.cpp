// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/train/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "labnet/common.hpp"

namespace labnet::train {

void AdamWConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("optimizer: beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("optimizer: beta2 must be in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("optimizer: eps must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("optimizer: weight_decay must be >= 0");
  if (!std::isfinite(clip_norm)) throw ConfigError("optimizer: clip_norm must be finite");
}

double clip_scale(double grad_norm, double clip_norm) {
  if (clip_norm <= 0.0 || grad_norm <= clip_norm) return 1.0;
  return clip_norm / grad_norm;
}

AdamW::AdamW(AdamWConfig cfg) : cfg_(cfg) { cfg_.validate(); }

StepReport AdamW::step(const std::vector<ParamSlot>& params, double lr) {
  StepReport rep;
  double sq = 0.0;
  for (const auto& p : params) {
    if (!p.grad) continue;
    for (std::size_t i = 0; i < p.size; ++i) {
      const double g = p.grad[i];
      if (!std::isfinite(g)) {
        rep.rejected = "non-finite gradient in '" + p.name + "' at index " + std::to_string(i);
        return rep;
      }
      sq += g * g;
    }
  }
  rep.grad_norm = std::sqrt(sq);
  if (!std::isfinite(rep.grad_norm)) {
    rep.rejected = "gradient norm overflow";
    return rep;
  }
  rep.clip_scale = clip_scale(rep.grad_norm, cfg_.clip_norm);

  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t);
  for (const auto& p : params) {
    Moments& mo = moments_[p.name];
    if (mo.m.size() != p.size) {
      mo.m.assign(p.size, 0.0);
      mo.v.assign(p.size, 0.0);
    }
    for (std::size_t i = 0; i < p.size; ++i) {
      const double g = p.grad ? p.grad[i] * rep.clip_scale : 0.0;
      mo.m[i] = cfg_.beta1 * mo.m[i] + (1.0 - cfg_.beta1) * g;
      mo.v[i] = cfg_.beta2 * mo.v[i] + (1.0 - cfg_.beta2) * g * g;
      double w = p.value[i];
      w -= lr * cfg_.weight_decay * w;
      w -= lr * (mo.m[i] / bc1) / (std::sqrt(mo.v[i] / bc2) + cfg_.eps);
      p.value[i] = static_cast<float>(w);
    }
  }
  rep.applied = true;
  return rep;
}

nlohmann::json AdamW::state_json() const {
  nlohmann::json j;
  j["step"] = step_;
  nlohmann::json mom = nlohmann::json::object();
  for (const auto& [name, mo] : moments_) mom[name] = {{"m", mo.m}, {"v", mo.v}};
  j["moments"] = std::move(mom);
  return j;
}

void AdamW::load_state_json(const nlohmann::json& j) {
  try {
    step_ = j.at("step").get<std::size_t>();
    moments_.clear();
    for (const auto& [name, mo] : j.at("moments").items()) {
      Moments m;
      m.m = mo.at("m").get<std::vector<double>>();
      m.v = mo.at("v").get<std::vector<double>>();
      if (m.m.size() != m.v.size()) throw CorruptModelError("optimizer state: moment sizes differ for '" + name + "'");
      moments_.emplace(name, std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModelError(std::string("optimizer state: ") + e.what());
  }
}

}  // namespace labnet::train
