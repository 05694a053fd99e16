// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/config.hpp"

#include <fstream>

#include "labnet/common.hpp"
#include "labnet/model/serialize.hpp"

namespace labnet {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& v, const std::string& key, T& out) {
  try {
    out = v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

}  // namespace

json dsp_to_json(const dsp::DspConfig& c) {
  return {{"sample_rate", c.sample_rate}, {"win_len", c.win_len}, {"hop", c.hop}, {"gla_iters", c.gla_iters}};
}

dsp::DspConfig dsp_from_json(const json& j) {
  require_object(j, "dsp block");
  dsp::DspConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "sample_rate") read(v, "dsp." + key, c.sample_rate);
    else if (key == "win_len") read(v, "dsp." + key, c.win_len);
    else if (key == "hop") read(v, "dsp." + key, c.hop);
    else if (key == "gla_iters") read(v, "dsp." + key, c.gla_iters);
    else throw ConfigError("unknown dsp key '" + key + "'");
  }
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("dsp: ") + e.what());
  }
  return c;
}

json sim_to_json(const SimSettings& s) {
  const auto& c = s.scene;
  return {{"length_min", c.length_min}, {"length_max", c.length_max}, {"width_min", c.width_min},
          {"width_max", c.width_max},   {"height_min", c.height_min}, {"height_max", c.height_max},
          {"t60_min", c.t60_min},       {"t60_max", c.t60_max},       {"wall_margin", c.wall_margin},
          {"noise_min", c.noise_min},   {"noise_max", c.noise_max},   {"snr_min", c.snr_min},
          {"snr_max", c.snr_max},       {"num_mics", c.num_mics},     {"seconds", s.seconds},
          {"snr_channel", s.snr_channel}};
}

SimSettings sim_from_json(const json& j) {
  require_object(j, "sim block");
  SimSettings s;
  auto& c = s.scene;
  for (const auto& [key, v] : j.items()) {
    const std::string k = "sim." + key;
    if (key == "length_min") read(v, k, c.length_min);
    else if (key == "length_max") read(v, k, c.length_max);
    else if (key == "width_min") read(v, k, c.width_min);
    else if (key == "width_max") read(v, k, c.width_max);
    else if (key == "height_min") read(v, k, c.height_min);
    else if (key == "height_max") read(v, k, c.height_max);
    else if (key == "t60_min") read(v, k, c.t60_min);
    else if (key == "t60_max") read(v, k, c.t60_max);
    else if (key == "wall_margin") read(v, k, c.wall_margin);
    else if (key == "noise_min") read(v, k, c.noise_min);
    else if (key == "noise_max") read(v, k, c.noise_max);
    else if (key == "snr_min") read(v, k, c.snr_min);
    else if (key == "snr_max") read(v, k, c.snr_max);
    else if (key == "num_mics") read(v, k, c.num_mics);
    else if (key == "seconds") read(v, k, s.seconds);
    else if (key == "snr_channel") read(v, k, s.snr_channel);
    else throw ConfigError("unknown sim key '" + key + "'");
  }
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("sim: ") + e.what());
  }
  if (!(s.seconds > 0.0)) throw ConfigError("sim.seconds must be positive");
  return s;
}

void RunConfig::validate() const {
  try {
    dsp::DspConfig d = dsp;
    d.compress_exp = model.compress_exp;
    d.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("dsp: ") + e.what());
  }
  model.validate();
  train.validate();
  if (dsp.num_bins() != model.num_bins) {
    throw ConfigError("model.num_bins (" + std::to_string(model.num_bins) + ") must equal win_len / 2 + 1 (" +
                      std::to_string(dsp.num_bins()) + ")");
  }
  if (sim.snr_channel >= sim.scene.num_mics) throw ConfigError("sim.snr_channel must be < sim.num_mics");
}

json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"dsp", dsp_to_json(c.dsp)},
          {"model", model::hyper_to_json(c.model)},
          {"train", train::to_json(c.train)},
          {"sim", sim_to_json(c.sim)}};
}

RunConfig run_config_from_json(const json& j) {
  require_object(j, "config");
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "seed") read(v, key, c.seed);
    else if (key == "dsp") c.dsp = dsp_from_json(v);
    else if (key == "model") c.model = model::hyper_from_json(v);
    else if (key == "train") c.train = train::train_config_from_json(v);
    else if (key == "sim") c.sim = sim_from_json(v);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.dsp.compress_exp = c.model.compress_exp;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace labnet
