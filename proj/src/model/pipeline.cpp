// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/model/pipeline.hpp"

#include <cmath>
#include <complex>

#include "labnet/common.hpp"
#include "labnet/util/parallel.hpp"

namespace labnet::model {

void check_recording(const Multichannel& rec) {
  if (rec.empty()) throw InputError("recording has no channels");
  const std::size_t len = rec[0].size();
  if (len == 0) throw InputError("recording is empty");
  for (std::size_t c = 0; c < rec.size(); ++c) {
    if (rec[c].size() != len) {
      throw InputError("channel " + std::to_string(c) + " has " + std::to_string(rec[c].size()) +
                       " samples, channel 0 has " + std::to_string(len));
    }
    for (float v : rec[c]) {
      if (!std::isfinite(v)) throw InputError("channel " + std::to_string(c) + " has non-finite samples");
    }
  }
}

void frame_features(const dsp::cfloat* frame, const float* prev_phase, std::size_t bins, float p,
                    float* out, float* phase_out) {
  for (std::size_t f = 0; f < bins; ++f) {
    const dsp::cfloat c = frame[f];
    const double mag = std::abs(std::complex<double>(c.real(), c.imag()));
    out[f * 3] = mag == 0.0 ? 0.0f : static_cast<float>(std::pow(mag, static_cast<double>(p)));
    phase_out[f] = (c.real() == 0.0f && c.imag() == 0.0f) ? 0.0f : std::arg(c);
  }
  for (std::size_t f = 0; f < bins; ++f) {
    out[f * 3 + 1] = prev_phase ? dsp::wrap_phase_float(static_cast<double>(phase_out[f]) -
                                                        static_cast<double>(prev_phase[f]))
                                : 0.0f;
    out[f * 3 + 2] = f > 0 ? dsp::wrap_phase_float(static_cast<double>(phase_out[f]) -
                                                   static_cast<double>(phase_out[f - 1]))
                           : 0.0f;
  }
}

nn::Tensor<float> features_from_spectra(const std::vector<dsp::Spectrogram>& spectra, float p) {
  if (spectra.empty()) throw InputError("no channels");
  const std::size_t C = spectra.size(), T = spectra[0].frames, F = spectra[0].bins;
  nn::Tensor<float> out({C, T, F, 3});
  parallel_for(C, [&](std::size_t c) {
    if (spectra[c].frames != T || spectra[c].bins != F) {
      throw InputError("channel spectrogram shapes differ");
    }
    std::vector<float> prev(F), cur(F);
    for (std::size_t t = 0; t < T; ++t) {
      frame_features(spectra[c].frame(t), t > 0 ? prev.data() : nullptr, F, p,
                     out.data() + ((c * T + t) * F) * 3, cur.data());
      std::swap(prev, cur);
    }
  });
  return out;
}

nn::Tensor<float> extract_features(const Multichannel& rec, const dsp::DspConfig& cfg) {
  check_recording(rec);
  cfg.validate();
  std::vector<dsp::Spectrogram> spectra(rec.size());
  parallel_for(rec.size(), [&](std::size_t c) { spectra[c] = dsp::stft(rec[c], cfg); });
  return features_from_spectra(spectra, cfg.compress_exp);
}

std::vector<dsp::Spectrogram> analysis_spectra(const Multichannel& rec, const dsp::DspConfig& cfg) {
  check_recording(rec);
  cfg.validate();
  std::vector<dsp::Spectrogram> spectra(rec.size());
  parallel_for(rec.size(), [&](std::size_t c) {
    std::vector<float> padded(rec[c]);
    padded.resize(padded.size() + cfg.hop, 0.0f);
    spectra[c] = dsp::stft(padded, cfg);
  });
  return spectra;
}

dsp::RealGrid to_grid(const nn::Tensor<float>& mask) {
  if (mask.rank() != 2) throw ContractError("mask must be [T, F]");
  dsp::RealGrid g(mask.dim(0), mask.dim(1));
  std::copy(mask.data(), mask.data() + mask.size(), g.data.begin());
  return g;
}

std::vector<float> reconstruct(const dsp::Spectrogram& ref, const dsp::RealGrid& mask,
                               const dsp::DspConfig& cfg, std::size_t length) {
  if (mask.frames != ref.frames || mask.bins != ref.bins) {
    throw ContractError("reconstruct: mask shape does not match the reference spectrogram");
  }
  const dsp::Compressed comp = dsp::compress(ref, cfg.compress_exp);
  dsp::RealGrid est(ref.frames, ref.bins);
  for (std::size_t i = 0; i < est.data.size(); ++i) est.data[i] = mask.data[i] * comp.magnitude.data[i];
  const dsp::RealGrid mag = dsp::decompress(est, cfg.compress_exp);
  const dsp::Spectrogram spec = dsp::griffin_lim(mag, dsp::phase(ref), cfg.gla_iters, cfg);
  return dsp::istft(spec, cfg, length);
}

std::vector<float> enhance(const Multichannel& rec, const Network<float>& net, dsp::DspConfig cfg) {
  cfg.compress_exp = net.hyper().compress_exp;
  const std::vector<dsp::Spectrogram> spectra = analysis_spectra(rec, cfg);
  auto features = nn::constant(features_from_spectra(spectra, cfg.compress_exp));
  const auto mask = net.forward(nullptr, features, nullptr);
  return reconstruct(spectra[0], to_grid(mask->value), cfg, rec[0].size());
}

std::vector<float> enhance(const Multichannel& rec, const ModelParams& params, dsp::DspConfig cfg) {
  return enhance(rec, Network<float>(params, false), cfg);
}

}  // namespace labnet::model
