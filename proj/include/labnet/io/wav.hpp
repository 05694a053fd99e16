// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// RIFF/WAVE reader and writer: 16-bit PCM and 32-bit IEEE float, any channel
// count. Samples are held as float in [-1, 1) for PCM.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace labnet::io {

enum class SampleFormat { kPcm16, kFloat32 };

struct WavData {
  int sample_rate = 16000;
  std::vector<std::vector<float>> channels;  // channels[c][n]

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_frames() const { return channels.empty() ? 0 : channels[0].size(); }
};

// Throws InputError on I/O failure or malformed/unsupported files.
WavData read_wav(const std::string& path);
void write_wav(const std::string& path, const WavData& wav,
               SampleFormat format = SampleFormat::kFloat32);

// Mono helpers.
void write_wav(const std::string& path, const std::vector<float>& samples, int sample_rate,
               SampleFormat format = SampleFormat::kFloat32);

}  // namespace labnet::io
