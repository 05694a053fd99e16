// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/dsp/stft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "labnet/common.hpp"
#include "labnet/dsp/fft.hpp"

namespace labnet::dsp {

void DspConfig::validate() const {
  if (sample_rate <= 0) throw ContractError("sample_rate must be positive");
  if (hop == 0 || win_len != 2 * hop) {
    throw ContractError("win_len must equal 2 * hop (got win_len=" +
                        std::to_string(win_len) + ", hop=" + std::to_string(hop) + ")");
  }
  if (!(compress_exp > 0.0f && compress_exp <= 1.0f)) {
    throw ContractError("compress_exp must lie in (0, 1]");
  }
  if (gla_iters < 0) throw ContractError("gla_iters must be >= 0");
}

std::size_t num_frames(std::size_t len, const DspConfig& cfg) {
  const std::size_t span = len + cfg.win_len - cfg.hop;
  return (span + cfg.hop - 1) / cfg.hop;
}

const std::vector<double>& hann_window(std::size_t win_len) {
  static std::mutex m;
  static std::map<std::size_t, std::unique_ptr<std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[win_len];
  if (!slot) {
    slot = std::make_unique<std::vector<double>>(win_len);
    for (std::size_t n = 0; n < win_len; ++n) {
      (*slot)[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(n) /
                                        static_cast<double>(win_len));
    }
  }
  return *slot;
}

namespace detail {

void analyze_frame(const double* samples, const DspConfig& cfg, cfloat* out) {
  const auto& w = hann_window(cfg.win_len);
  std::vector<double> buf(cfg.win_len);
  for (std::size_t n = 0; n < cfg.win_len; ++n) buf[n] = samples[n] * w[n];
  const RealFft& fft = real_fft(cfg.win_len);
  std::vector<std::complex<double>> spec(fft.bins());
  fft.forward(buf.data(), spec.data());
  for (std::size_t f = 0; f < spec.size(); ++f) {
    out[f] = cfloat(static_cast<float>(spec[f].real()), static_cast<float>(spec[f].imag()));
  }
}

void synth_frame(const cfloat* bins, const DspConfig& cfg, double* out) {
  const RealFft& fft = real_fft(cfg.win_len);
  std::vector<std::complex<double>> spec(fft.bins());
  for (std::size_t f = 0; f < spec.size(); ++f) spec[f] = {bins[f].real(), bins[f].imag()};
  fft.inverse(spec.data(), out);
  const auto& w = hann_window(cfg.win_len);
  for (std::size_t n = 0; n < cfg.win_len; ++n) out[n] *= w[n];
}

void overlap_region(const double* prev_contrib, const double* cur_contrib,
                    const DspConfig& cfg, double* out) {
  const auto& w = hann_window(cfg.win_len);
  const std::size_t hop = cfg.hop;
  for (std::size_t i = 0; i < hop; ++i) {
    double s = 0.0;
    double env = 0.0;
    if (prev_contrib) {
      s += prev_contrib[hop + i];
      env += w[hop + i] * w[hop + i];
    }
    if (cur_contrib) {
      s += cur_contrib[i];
      env += w[i] * w[i];
    }
    out[i] = env > 1e-12 ? s / env : 0.0;
  }
}

std::vector<double> synthesize_padded(const Spectrogram& spec, const DspConfig& cfg) {
  const std::size_t hop = cfg.hop;
  const std::size_t frames = spec.frames;
  std::vector<double> out((frames + 1) * hop, 0.0);
  std::vector<double> prev(cfg.win_len), cur(cfg.win_len);
  for (std::size_t j = 0; j <= frames; ++j) {
    const bool has_cur = j < frames;
    if (has_cur) synth_frame(spec.frame(j), cfg, cur.data());
    overlap_region(j > 0 ? prev.data() : nullptr, has_cur ? cur.data() : nullptr, cfg,
                   out.data() + j * hop);
    std::swap(prev, cur);
  }
  return out;
}

Spectrogram analyze_padded(const std::vector<double>& padded, std::size_t frames,
                           const DspConfig& cfg) {
  Spectrogram spec(frames, cfg.num_bins());
  std::vector<double> buf(cfg.win_len);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < cfg.win_len; ++n) {
      const std::size_t idx = t * cfg.hop + n;
      buf[n] = idx < padded.size() ? padded[idx] : 0.0;
    }
    analyze_frame(buf.data(), cfg, spec.frame(t));
  }
  return spec;
}

}  // namespace detail

Spectrogram stft(std::span<const float> wave, const DspConfig& cfg) {
  cfg.validate();
  if (wave.empty()) throw InputError("stft: empty waveform");
  for (float v : wave) {
    if (!std::isfinite(v)) throw InputError("stft: non-finite sample in waveform");
  }
  const std::size_t frames = num_frames(wave.size(), cfg);
  const std::size_t lead = cfg.win_len - cfg.hop;
  std::vector<double> padded(frames * cfg.hop + cfg.win_len, 0.0);
  for (std::size_t n = 0; n < wave.size(); ++n) padded[lead + n] = wave[n];
  return detail::analyze_padded(padded, frames, cfg);
}

std::vector<float> istft(const Spectrogram& spec, const DspConfig& cfg, std::size_t length) {
  cfg.validate();
  for (const auto& c : spec.data) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw InputError("istft: non-finite spectrogram entry");
    }
  }
  if (spec.frames == 0) return std::vector<float>(length, 0.0f);
  const std::vector<double> padded = detail::synthesize_padded(spec, cfg);
  const std::size_t lead = cfg.win_len - cfg.hop;
  if (length == 0) length = (spec.frames - 1) * cfg.hop;
  std::vector<float> out(length, 0.0f);
  for (std::size_t n = 0; n < length && lead + n < padded.size(); ++n) {
    out[n] = static_cast<float>(padded[lead + n]);
  }
  return out;
}

Compressed compress(const Spectrogram& spec, float p) {
  if (!(p > 0.0f && p <= 1.0f)) throw ContractError("compress: p must lie in (0, 1]");
  Compressed out{RealGrid(spec.frames, spec.bins), Spectrogram(spec.frames, spec.bins)};
  for (std::size_t i = 0; i < spec.data.size(); ++i) {
    const std::complex<double> s(spec.data[i].real(), spec.data[i].imag());
    const double mag = std::abs(s);
    if (mag == 0.0) continue;
    const double mc = std::pow(mag, static_cast<double>(p));
    out.magnitude.data[i] = static_cast<float>(mc);
    const std::complex<double> c = s * (mc / mag);
    out.complex.data[i] = cfloat(static_cast<float>(c.real()), static_cast<float>(c.imag()));
  }
  return out;
}

RealGrid decompress(const RealGrid& compressed_magnitude, float p) {
  if (!(p > 0.0f && p <= 1.0f)) throw ContractError("decompress: p must lie in (0, 1]");
  RealGrid out(compressed_magnitude.frames, compressed_magnitude.bins);
  const double inv = 1.0 / static_cast<double>(p);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double v = compressed_magnitude.data[i];
    out.data[i] = v > 0.0 ? static_cast<float>(std::pow(v, inv)) : 0.0f;
  }
  return out;
}

RealGrid magnitude(const Spectrogram& spec) {
  RealGrid out(spec.frames, spec.bins);
  for (std::size_t i = 0; i < spec.data.size(); ++i) out.data[i] = std::abs(spec.data[i]);
  return out;
}

RealGrid phase(const Spectrogram& spec) {
  RealGrid out(spec.frames, spec.bins);
  for (std::size_t i = 0; i < spec.data.size(); ++i) {
    const auto& c = spec.data[i];
    out.data[i] = (c.real() == 0.0f && c.imag() == 0.0f) ? 0.0f : std::arg(c);
  }
  return out;
}

double wrap_phase(double x) {
  return x - 2.0 * kPi * std::ceil((x - kPi) / (2.0 * kPi));
}

float wrap_phase_float(double x) {
  const float v = static_cast<float>(wrap_phase(x));
  // Rounding to float may land exactly on -pi; fold it to +pi.
  return v <= -static_cast<float>(kPi) ? static_cast<float>(kPi) : v;
}

PhaseFeatures phase_features(const Spectrogram& spec) {
  const RealGrid ph = phase(spec);
  PhaseFeatures out{RealGrid(spec.frames, spec.bins), RealGrid(spec.frames, spec.bins)};
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t f = 0; f < spec.bins; ++f) {
      if (t > 0) {
        out.time.at(t, f) =
            wrap_phase_float(static_cast<double>(ph.at(t, f)) - static_cast<double>(ph.at(t - 1, f)));
      }
      if (f > 0) {
        out.freq.at(t, f) =
            wrap_phase_float(static_cast<double>(ph.at(t, f)) - static_cast<double>(ph.at(t, f - 1)));
      }
    }
  }
  return out;
}

Spectrogram polar(const RealGrid& mag, const RealGrid& phase_grid) {
  if (mag.frames != phase_grid.frames || mag.bins != phase_grid.bins) {
    throw ContractError("polar: magnitude/phase shape mismatch");
  }
  Spectrogram out(mag.frames, mag.bins);
  for (std::size_t i = 0; i < mag.data.size(); ++i) {
    const double m = mag.data[i];
    const double p = phase_grid.data[i];
    out.data[i] = cfloat(static_cast<float>(m * std::cos(p)), static_cast<float>(m * std::sin(p)));
  }
  return out;
}

namespace detail {

void restore_magnitude(const float* mag, const cfloat* consistent, std::size_t n, cfloat* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> c(consistent[i].real(), consistent[i].imag());
    const double a = std::abs(c);
    const double m = mag[i];
    if (a > 0.0) {
      const std::complex<double> v = c * (m / a);
      out[i] = cfloat(static_cast<float>(v.real()), static_cast<float>(v.imag()));
    } else {
      out[i] = cfloat(static_cast<float>(m), 0.0f);
    }
  }
}

}  // namespace detail

Spectrogram griffin_lim(const RealGrid& mag_target, const RealGrid& phase_init, int iters,
                        const DspConfig& cfg) {
  if (iters < 0) throw ContractError("griffin_lim: iters must be >= 0");
  for (float m : mag_target.data) {
    if (!(m >= 0.0f)) throw ContractError("griffin_lim: target magnitude must be >= 0");
  }
  Spectrogram spec = polar(mag_target, phase_init);
  for (int it = 0; it < iters; ++it) {
    const std::vector<double> padded = detail::synthesize_padded(spec, cfg);
    const Spectrogram consistent = detail::analyze_padded(padded, spec.frames, cfg);
    detail::restore_magnitude(mag_target.data.data(), consistent.data.data(), spec.data.size(),
                              spec.data.data());
  }
  return spec;
}

double consistency_error(const Spectrogram& spec, const RealGrid& mag_target,
                         const DspConfig& cfg) {
  const std::vector<double> padded = detail::synthesize_padded(spec, cfg);
  const Spectrogram consistent = detail::analyze_padded(padded, spec.frames, cfg);
  double acc = 0.0;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t f = 0; f < spec.bins; ++f) {
      const double weight = (f == 0 || f + 1 == spec.bins) ? 1.0 : 2.0;
      const double d = std::abs(std::complex<double>(consistent.at(t, f).real(),
                                                     consistent.at(t, f).imag())) -
                       mag_target.at(t, f);
      acc += weight * d * d;
    }
  }
  return std::sqrt(acc);
}

}  // namespace labnet::dsp
