// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "labnet/dsp/stft.hpp"
#include "labnet/model/network.hpp"
#include "labnet/model/params.hpp"

namespace labnet::model {

// C waveforms of equal length; channel 0 is the reference.
using Multichannel = std::vector<std::vector<float>>;

// Throws InputError unless C >= 1, all channels have the same non-zero
// length and every sample is finite.
void check_recording(const Multichannel& rec);

// Per-bin network input for one frame: out[f*3 + {0,1,2}] = compressed
// magnitude, time phase difference, frequency phase difference. prev_phase
// is the previous frame's phase (null for the first frame); the frame's own
// phase is written to phase_out.
void frame_features(const dsp::cfloat* frame, const float* prev_phase, std::size_t bins, float p,
                    float* out, float* phase_out);

// [C, T, F, 3] features with T = num_frames(len).
nn::Tensor<float> extract_features(const Multichannel& rec, const dsp::DspConfig& cfg);

// Features over an explicit set of per-channel spectrograms.
nn::Tensor<float> features_from_spectra(const std::vector<dsp::Spectrogram>& spectra, float p);

// Mask -> waveform: estimated compressed magnitude = mask * |X_ref|^p,
// decompressed, refined by cfg.gla_iters Griffin-Lim iterations started from
// the noisy reference phase, then inverted to `length` samples.
std::vector<float> reconstruct(const dsp::Spectrogram& ref, const dsp::RealGrid& mask,
                               const dsp::DspConfig& cfg, std::size_t length);

// Spectra used by the offline path: each channel analysed with one extra hop
// of trailing zeros, so the frame set matches what a stream has seen when
// the last real sample is emitted.
std::vector<dsp::Spectrogram> analysis_spectra(const Multichannel& rec, const dsp::DspConfig& cfg);

dsp::RealGrid to_grid(const nn::Tensor<float>& mask);

// Offline enhancement. cfg.compress_exp is taken from the model's hyper block.
std::vector<float> enhance(const Multichannel& rec, const ModelParams& params,
                           dsp::DspConfig cfg = {});
std::vector<float> enhance(const Multichannel& rec, const Network<float>& net,
                           dsp::DspConfig cfg = {});

// Offline-equivalent output produced through StreamingEnhancer: the input is
// fed hop by hop, followed by zeros until the last sample is emitted, and
// the warm-up delay is trimmed.
std::vector<float> enhance_streaming(const Multichannel& rec, const ModelParams& params,
                                     dsp::DspConfig cfg = {});

// Frame-synchronous enhancement. Each call consumes one hop per channel and
// returns one hop of output; output sample n corresponds to offline sample
// n - delay_samples(). Zeros are emitted during warm-up.
class StreamingEnhancer {
 public:
  StreamingEnhancer(const ModelParams& params, dsp::DspConfig cfg, std::size_t channels);

  std::size_t channels() const { return channels_; }
  std::size_t hop() const { return cfg_.hop; }
  // (1 + 2 * gla_iters) hops.
  std::size_t delay_samples() const;
  // Emission delay plus one hop of block buffering.
  double latency_ms() const;

  std::vector<float> process(const Multichannel& block);

  // Back to the all-zero initial state; optionally with a new channel count.
  void reset();
  void reset(std::size_t channels);

 private:
  struct Level {
    std::vector<double> prev_contrib;
    std::vector<double> prev_region;
    bool has_prev = false;
  };

  void push_frame(std::size_t level, std::size_t index, const dsp::cfloat* frame);

  Network<float> net_;
  dsp::DspConfig cfg_;
  std::size_t channels_;
  std::size_t step_ = 0;
  NetState<float> net_state_;
  std::vector<std::vector<double>> prev_block_;
  std::vector<std::vector<float>> prev_phase_;
  std::map<std::size_t, std::vector<float>> mags_;
  std::vector<Level> levels_;
  std::deque<std::vector<float>> ready_;
  std::size_t emitted_ = 0;
};

}  // namespace labnet::model
