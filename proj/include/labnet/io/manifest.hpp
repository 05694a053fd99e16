// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Dataset manifest: one JSON object per line. Paths are relative to the
// manifest's directory.
//
//   {"id": "utt00000", "num_mics": 6, "seed": 123,
//    "paths": {"noisy": [...], "clean": [...], "noise": [...]},
//    "room": [l, w, h], "t60": 0.31, "snr_db": 4.2,
//    "positions": {"source": [x,y,z], "mics": [[...]], "noises": [[...]]}}
//
// "clean" holds the reverberant clean signal at each microphone.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace labnet::io {

using Point = std::array<double, 3>;

struct ManifestEntry {
  std::string id;
  std::size_t num_mics = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> noisy;
  std::vector<std::string> clean;
  std::vector<std::string> noise;
  Point room{};
  double t60 = 0.0;
  double snr_db = 0.0;
  Point source{};
  std::vector<Point> mics;
  std::vector<Point> noises;
};

nlohmann::json to_json(const ManifestEntry& e);
// Throws InputError naming the missing or mistyped field.
ManifestEntry entry_from_json(const nlohmann::json& j);

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::string& path);

// Directory containing `path` (".", if none), for resolving relative paths.
std::string parent_dir(const std::string& path);
std::string join_path(const std::string& dir, const std::string& rel);

}  // namespace labnet::io
