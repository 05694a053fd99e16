// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Parameter file layout (all integers little-endian):
//   "LABNETPM"                 8-byte magic
//   u32 version                currently 1
//   u32 n, n bytes             hyper block as UTF-8 JSON
//   u32 record count
//   per record:
//     u32 n, n bytes           tensor name
//     u32 rank, rank x u64     shape
//     numel x f32              payload

#pragma once

#include <string>

#include <json.hpp>

#include "labnet/model/params.hpp"

namespace labnet::model {

inline constexpr char kParamMagic[8] = {'L', 'A', 'B', 'N', 'E', 'T', 'P', 'M'};
inline constexpr unsigned kParamVersion = 1;

nlohmann::json hyper_to_json(const ModelHyper& hyper);
// Unknown keys raise ConfigError; missing keys keep their defaults.
ModelHyper hyper_from_json(const nlohmann::json& j);

void save_params(const ModelParams& params, const std::string& path);
// Throws CorruptModelError naming the offending record or field.
ModelParams load_params(const std::string& path);

// Hyper block, parameter total and per-tensor shapes.
nlohmann::json describe(const ModelParams& params);

}  // namespace labnet::model
