// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "labnet/io/manifest.hpp"
#include "labnet/sim/scene.hpp"

namespace labnet::sim {

struct DatasetConfig {
  std::size_t count = 10;
  std::uint64_t seed = 0;
  SceneConstraints scene;
  // Synthetic sources when true; otherwise 16 kHz mono WAVs from the dirs.
  bool synthetic = true;
  double seconds = 2.0;  // synthetic utterance length
  std::string clean_dir;
  std::string noise_dir;
  std::string out_dir;
  std::string id_prefix = "utt";
  std::size_t snr_channel = 0;
};

struct DatasetResult {
  std::vector<io::ManifestEntry> entries;
  std::vector<std::string> errors;  // one line per skipped utterance
  std::string manifest_path;
};

// Generates `count` utterances under out_dir (one subdirectory each) and
// writes out_dir/manifest.jsonl. Utterance i draws from an RNG seeded by
// derive_seed(seed, i), so the result does not depend on thread count.
DatasetResult build_dataset(const DatasetConfig& cfg);

// Builds one utterance in memory (what build_dataset writes for index i).
MultichannelRecording synth_utterance(const DatasetConfig& cfg, std::size_t index);

// Loads the per-channel WAVs referenced by a manifest entry.
MultichannelRecording load_recording(const io::ManifestEntry& entry, const std::string& base_dir);

}  // namespace labnet::sim
