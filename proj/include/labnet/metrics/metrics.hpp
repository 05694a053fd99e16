// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "labnet/io/manifest.hpp"
#include "labnet/sim/scene.hpp"

namespace labnet::metrics {

inline constexpr double kSiSnrCeiling = 60.0;

// Scale-invariant SNR in dB after mean removal, clamped to
// [-kSiSnrCeiling, kSiSnrCeiling]. Throws InputError on length mismatch or a
// silent reference.
double si_snr(const std::vector<float>& est, const std::vector<float>& ref);

// Short-time objective intelligibility (10 kHz internal rate, 15 third-octave
// bands from 150 Hz, 384 ms segments, -15 dB clipping). Throws InputError for
// inputs shorter than one segment after silent-frame removal.
double stoi(const std::vector<float>& est, const std::vector<float>& ref, int sample_rate = 16000);

// Mean over frames of the RMS difference of log power spectra (dB).
double log_spectral_distance(const std::vector<float>& est, const std::vector<float>& ref);

// Polyphase rational resampler with a Kaiser-windowed sinc low-pass.
std::vector<double> resample(const std::vector<double>& x, int up, int down);

struct EvalRow {
  std::string id;
  std::size_t num_mics = 0;
  double si_snr = 0.0;
  double si_snr_noisy = 0.0;
  double si_snr_improvement = 0.0;
  double stoi = 0.0;
  double stoi_noisy = 0.0;
  double lsd = 0.0;
  std::string error;  // non-empty when the utterance failed
};

struct EvalSummary {
  std::size_t count = 0;
  std::size_t failures = 0;
  double si_snr = 0.0;
  double si_snr_noisy = 0.0;
  double si_snr_improvement = 0.0;
  double stoi = 0.0;
  double stoi_noisy = 0.0;
  double lsd = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  EvalSummary summary;
};

using Enhancer = std::function<std::vector<float>(const sim::MultichannelRecording&)>;

// Scores each utterance against the reverberant clean reference channel.
// Per-utterance failures are recorded in the row and excluded from means.
EvalReport evaluate(const std::vector<io::ManifestEntry>& manifest, const std::string& base_dir,
                    const Enhancer& enhancer);
// Same over recordings already in memory (ids are "utt<i>").
EvalReport evaluate(const std::vector<sim::MultichannelRecording>& recordings,
                    const Enhancer& enhancer);

EvalSummary summarize(const std::vector<EvalRow>& rows);

nlohmann::json to_json(const EvalRow& row);
nlohmann::json to_json(const EvalSummary& summary);

}  // namespace labnet::metrics
