// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "labnet/dsp/stft.hpp"
#include "labnet/nn/autograd.hpp"

namespace labnet::train {

struct LossWeights {
  double magnitude = 1.0;  // alpha
  double complex = 1.0;    // beta
};

// alpha * MSE(|S_est|^p, |S|^p) + beta * MSE over the real/imaginary parts of
// the compressed complex spectra (2 * T * F values). Shapes must match.
double spectral_loss(const dsp::Spectrogram& est, const dsp::Spectrogram& target, float p,
                     const LossWeights& w);

// Per-bin constants for training the real mask m directly: the estimate is
// m * Yc with Yc the compressed noisy reference, so every term is quadratic
// in m.
struct MaskTarget {
  std::size_t frames = 0, bins = 0;
  std::vector<double> noisy_mag, noisy_re, noisy_im;     // |Y|^p, Re/Im Yc
  std::vector<double> clean_mag, clean_re, clean_im;     // |S|^p, Re/Im Sc
};

MaskTarget make_mask_target(const dsp::Spectrogram& noisy_ref, const dsp::Spectrogram& clean_ref, float p);

// spectral_loss of (mask * noisy, clean) as a differentiable scalar of the
// [T, F] mask.
template <typename Real>
nn::Var<Real> mask_loss(nn::Tape<Real>* tape, const nn::Var<Real>& mask, const MaskTarget& target,
                        const LossWeights& w);

}  // namespace labnet::train
