// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Short-time Fourier analysis/synthesis and the spectral features used by the
// enhancement network.
//
// Framing: the signal is preceded by (win_len - hop) zeros and zero-extended at
// the tail. Frame t covers padded samples [t*hop, t*hop + win_len), i.e. real
// samples [(t-1)*hop, (t+1)*hop) for win_len = 2*hop. With
//   T = ceil((len + win_len - hop) / hop)
// frames every real sample lies under two frames, so synthesis reconstructs
// the whole signal and streaming analysis completes frame t as soon as real
// sample (t+1)*hop - 1 has arrived.
//
// Synthesis is the least-squares inverse: overlap-add of window-weighted
// frames divided by the squared-window envelope of the frames present.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace labnet::dsp {

using cfloat = std::complex<float>;

struct DspConfig {
  int sample_rate = 16000;
  std::size_t win_len = 512;
  std::size_t hop = 256;
  float compress_exp = 0.3f;
  int gla_iters = 1;

  std::size_t num_bins() const { return win_len / 2 + 1; }
  // Throws ContractError when an invariant is violated.
  void validate() const;
};

// T x F grid of complex STFT coefficients, frame-major.
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<cfloat> data;

  Spectrogram() = default;
  Spectrogram(std::size_t t, std::size_t f) : frames(t), bins(f), data(t * f) {}

  cfloat& at(std::size_t t, std::size_t f) { return data[t * bins + f]; }
  const cfloat& at(std::size_t t, std::size_t f) const { return data[t * bins + f]; }
  const cfloat* frame(std::size_t t) const { return data.data() + t * bins; }
  cfloat* frame(std::size_t t) { return data.data() + t * bins; }
};

// Real-valued T x F map (magnitudes, phases, masks).
struct RealGrid {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<float> data;

  RealGrid() = default;
  RealGrid(std::size_t t, std::size_t f, float fill = 0.0f)
      : frames(t), bins(f), data(t * f, fill) {}

  float& at(std::size_t t, std::size_t f) { return data[t * bins + f]; }
  float at(std::size_t t, std::size_t f) const { return data[t * bins + f]; }
};

std::size_t num_frames(std::size_t len, const DspConfig& cfg);

// Periodic Hann of length cfg.win_len.
const std::vector<double>& hann_window(std::size_t win_len);

Spectrogram stft(std::span<const float> wave, const DspConfig& cfg);

// Real samples [0, length). length = 0 means (frames - 1) * hop, the full
// span covered by two frames.
std::vector<float> istft(const Spectrogram& spec, const DspConfig& cfg,
                         std::size_t length = 0);

struct Compressed {
  RealGrid magnitude;  // |S|^p
  Spectrogram complex;  // |S|^p e^{j angle S}
};

Compressed compress(const Spectrogram& spec, float p);
RealGrid decompress(const RealGrid& compressed_magnitude, float p);

RealGrid magnitude(const Spectrogram& spec);
// atan2 phase; exact zeros map to 0.
RealGrid phase(const Spectrogram& spec);

// Maps an angle into (-pi, pi].
double wrap_phase(double x);
// wrap_phase rounded to float, still in (-pi, pi].
float wrap_phase_float(double x);

struct PhaseFeatures {
  RealGrid time;  // wrap(phi[t,f] - phi[t-1,f]), zero at t = 0
  RealGrid freq;  // wrap(phi[t,f] - phi[t,f-1]), zero at f = 0
};

PhaseFeatures phase_features(const Spectrogram& spec);

Spectrogram polar(const RealGrid& mag, const RealGrid& phase);

// Griffin-Lim: starts from mag * e^{j phase_init}; each iteration projects
// onto consistent spectrograms (synthesis then analysis over the same frame
// set) and restores the target magnitude.
Spectrogram griffin_lim(const RealGrid& mag_target, const RealGrid& phase_init,
                        int iters, const DspConfig& cfg);

// || |STFT(iSTFT(S))| - mag_target ||, measured over the two-sided spectrum
// (bins 1..F-2 weighted twice), the norm in which the projection is orthogonal.
double consistency_error(const Spectrogram& spec, const RealGrid& mag_target,
                         const DspConfig& cfg);

// Frame-level building blocks shared by the offline and streaming paths so
// both produce identical arithmetic.
namespace detail {

// Windowed analysis of win_len padded-domain samples.
void analyze_frame(const double* samples, const DspConfig& cfg, cfloat* out);

// Window-weighted inverse DFT of one frame (win_len samples).
void synth_frame(const cfloat* bins, const DspConfig& cfg, double* out);

// Padded-domain synthesis over a frame set of `frames` frames: returns
// (frames + 1) * hop samples.
std::vector<double> synthesize_padded(const Spectrogram& spec, const DspConfig& cfg);

// Analysis of a padded-domain signal into `frames` frames (no re-padding).
Spectrogram analyze_padded(const std::vector<double>& padded, std::size_t frames,
                           const DspConfig& cfg);

// One hop-long output region assembled from the tail half of the previous
// frame and the head half of the current one. Either contribution may be
// absent (nullptr).
void overlap_region(const double* prev_contrib, const double* cur_contrib,
                    const DspConfig& cfg, double* out);

// Griffin-Lim magnitude step: target magnitude with the phase of `consistent`
// (phase 0 where consistent is exactly zero).
void restore_magnitude(const float* mag, const cfloat* consistent, std::size_t n, cfloat* out);

}  // namespace detail

}  // namespace labnet::dsp
