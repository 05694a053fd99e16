// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Streaming form of enhance(). Griffin-Lim is unrolled into levels: level 0
// holds the masked frames, level i the frames after i iterations. Level-l
// region r (hop samples of the padded signal) needs level-l frames r-1 and r;
// level-(l+1) frame t needs level-l regions t and t+1. Frame j of the input
// is complete after block j, so level-k frame t is ready at step t + k and
// real block b (padded region b + 1) at step b + 1 + k. Blocks are emitted
// at step b + 1 + 2k, which keeps the end-to-end latency at one analysis
// window plus one window per Griffin-Lim round.

#include <algorithm>

#include "labnet/common.hpp"
#include "labnet/model/pipeline.hpp"

namespace labnet::model {

StreamingEnhancer::StreamingEnhancer(const ModelParams& params, dsp::DspConfig cfg,
                                     std::size_t channels)
    : net_(params, false), cfg_(cfg), channels_(channels) {
  cfg_.compress_exp = params.hyper().compress_exp;
  cfg_.validate();
  if (cfg_.num_bins() != params.hyper().num_bins) {
    throw ContractError("stream: DSP config yields " + std::to_string(cfg_.num_bins()) +
                        " bins, model expects " + std::to_string(params.hyper().num_bins));
  }
  reset(channels);
}

std::size_t StreamingEnhancer::delay_samples() const {
  return (1 + 2 * static_cast<std::size_t>(cfg_.gla_iters)) * cfg_.hop;
}

double StreamingEnhancer::latency_ms() const {
  return 1000.0 * static_cast<double>(delay_samples() + cfg_.hop) / cfg_.sample_rate;
}

void StreamingEnhancer::reset() { reset(channels_); }

void StreamingEnhancer::reset(std::size_t channels) {
  if (channels == 0) throw ContractError("stream: channel count must be >= 1");
  channels_ = channels;
  step_ = 0;
  emitted_ = 0;
  net_state_.reset();
  prev_block_.assign(channels, std::vector<double>(cfg_.hop, 0.0));
  prev_phase_.assign(channels, std::vector<float>(cfg_.num_bins(), 0.0f));
  mags_.clear();
  levels_.assign(static_cast<std::size_t>(cfg_.gla_iters) + 1, Level{});
  ready_.clear();
}

void StreamingEnhancer::push_frame(std::size_t level, std::size_t index, const dsp::cfloat* frame) {
  const std::size_t hop = cfg_.hop;
  Level& lv = levels_[level];
  std::vector<double> contrib(cfg_.win_len);
  dsp::detail::synth_frame(frame, cfg_, contrib.data());
  std::vector<double> region(hop);
  dsp::detail::overlap_region(lv.has_prev ? lv.prev_contrib.data() : nullptr, contrib.data(), cfg_,
                              region.data());
  lv.prev_contrib = std::move(contrib);
  lv.has_prev = true;

  if (level + 1 == levels_.size()) {
    // Region 0 is the leading pad; region r carries real block r - 1.
    if (index >= 1) {
      std::vector<float> out(hop);
      for (std::size_t i = 0; i < hop; ++i) out[i] = static_cast<float>(region[i]);
      ready_.push_back(std::move(out));
    }
    return;
  }
  if (index >= 1) {
    std::vector<double> samples(cfg_.win_len);
    std::copy(lv.prev_region.begin(), lv.prev_region.end(), samples.begin());
    std::copy(region.begin(), region.end(), samples.begin() + static_cast<long>(hop));
    std::vector<dsp::cfloat> consistent(cfg_.num_bins()), next(cfg_.num_bins());
    dsp::detail::analyze_frame(samples.data(), cfg_, consistent.data());
    const std::vector<float>& mag = mags_.at(index - 1);
    dsp::detail::restore_magnitude(mag.data(), consistent.data(), next.size(), next.data());
    lv.prev_region = std::move(region);
    push_frame(level + 1, index - 1, next.data());
    return;
  }
  lv.prev_region = std::move(region);
}

std::vector<float> StreamingEnhancer::process(const Multichannel& block) {
  const std::size_t hop = cfg_.hop, F = cfg_.num_bins(), C = channels_;
  if (block.size() != C) {
    throw ContractError("stream: got " + std::to_string(block.size()) + " channels, stream has " +
                        std::to_string(C) + " (reset required to change)");
  }
  for (const auto& ch : block) {
    if (ch.size() != hop) throw ContractError("stream: every channel block must hold one hop");
    for (float v : ch) {
      if (!std::isfinite(v)) throw InputError("stream: non-finite input sample");
    }
  }
  const std::size_t j = step_;

  // Analysis and features for frame j of every channel.
  nn::Tensor<float> feats({C, 1, F, 3});
  std::vector<dsp::cfloat> ref_frame(F);
  std::vector<float> ref_cmag(F);
  {
    std::vector<double> samples(cfg_.win_len);
    std::vector<dsp::cfloat> frame(F);
    std::vector<float> phase(F);
    for (std::size_t c = 0; c < C; ++c) {
      std::copy(prev_block_[c].begin(), prev_block_[c].end(), samples.begin());
      for (std::size_t i = 0; i < hop; ++i) {
        samples[hop + i] = block[c][i];
        prev_block_[c][i] = block[c][i];
      }
      dsp::detail::analyze_frame(samples.data(), cfg_, frame.data());
      float* out = feats.data() + c * F * 3;
      frame_features(frame.data(), j > 0 ? prev_phase_[c].data() : nullptr, F, cfg_.compress_exp,
                     out, phase.data());
      prev_phase_[c] = phase;
      if (c == 0) {
        ref_frame = frame;
        for (std::size_t f = 0; f < F; ++f) ref_cmag[f] = out[f * 3];
      }
    }
  }

  const auto mask = net_.forward(nullptr, nn::constant(std::move(feats)), &net_state_);

  // Level-0 frame: masked compressed magnitude, decompressed, noisy phase.
  dsp::RealGrid est(1, F);
  for (std::size_t f = 0; f < F; ++f) est.data[f] = mask->value[f] * ref_cmag[f];
  const dsp::RealGrid mag = dsp::decompress(est, cfg_.compress_exp);
  dsp::Spectrogram ref_spec(1, F);
  std::copy(ref_frame.begin(), ref_frame.end(), ref_spec.data.begin());
  const dsp::Spectrogram s0 = dsp::polar(mag, dsp::phase(ref_spec));
  mags_[j] = mag.data;
  push_frame(0, j, s0.data.data());
  // Level-i frame t needs mags_[t] for t >= j - i.
  const std::size_t keep = levels_.size() + 1;
  while (!mags_.empty() && mags_.begin()->first + keep < j) mags_.erase(mags_.begin());

  ++step_;
  const std::size_t delay_blocks = delay_samples() / hop;
  if (step_ <= delay_blocks) return std::vector<float>(hop, 0.0f);
  if (ready_.empty()) throw ContractError("stream: internal pipeline underrun");
  std::vector<float> out = std::move(ready_.front());
  ready_.pop_front();
  ++emitted_;
  return out;
}

}  // namespace labnet::model

namespace labnet::model {

std::vector<float> enhance_streaming(const Multichannel& rec, const ModelParams& params,
                                     dsp::DspConfig cfg) {
  check_recording(rec);
  StreamingEnhancer s(params, cfg, rec.size());
  const std::size_t hop = s.hop(), len = rec[0].size(), delay = s.delay_samples();
  std::vector<float> out;
  out.reserve(len + delay + hop);
  Multichannel block(rec.size(), std::vector<float>(hop));
  for (std::size_t start = 0; out.size() < len + delay; start += hop) {
    for (std::size_t c = 0; c < rec.size(); ++c) {
      for (std::size_t i = 0; i < hop; ++i) block[c][i] = start + i < len ? rec[c][start + i] : 0.0f;
    }
    const std::vector<float> y = s.process(block);
    out.insert(out.end(), y.begin(), y.end());
  }
  return {out.begin() + static_cast<long>(delay), out.begin() + static_cast<long>(delay + len)};
}

}  // namespace labnet::model
