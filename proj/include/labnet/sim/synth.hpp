// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic stand-ins for speech and noise corpora.

#pragma once

#include <string>
#include <vector>

#include "labnet/util/random.hpp"

namespace labnet::sim {

// Voiced-speech-like source: a harmonic complex on a gliding f0 (90-250 Hz)
// with a formant-shaped spectral envelope, syllable-rate amplitude
// modulation (3-6 Hz) and short pauses. Peak normalised to 0.5.
std::vector<float> synth_speech(Rng& rng, double seconds, int sample_rate = 16000);

enum class NoiseKind { kWhite, kPink, kBabble, kHum };

NoiseKind noise_kind_from_string(const std::string& name);
const char* noise_kind_name(NoiseKind kind);

// Unit-RMS noise of the given kind.
std::vector<float> synth_noise(Rng& rng, NoiseKind kind, double seconds, int sample_rate = 16000);

}  // namespace labnet::sim
