// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/train/loss.hpp"

#include <cmath>

#include "labnet/common.hpp"

namespace labnet::train {

namespace {

void compressed(std::complex<float> v, float p, double& mag, double& re, double& im) {
  const double a = std::abs(std::complex<double>(v.real(), v.imag()));
  if (a == 0.0) {
    mag = re = im = 0.0;
    return;
  }
  mag = std::pow(a, static_cast<double>(p));
  re = mag * v.real() / a;
  im = mag * v.imag() / a;
}

}  // namespace

double spectral_loss(const dsp::Spectrogram& est, const dsp::Spectrogram& target, float p,
                     const LossWeights& w) {
  if (est.frames != target.frames || est.bins != target.bins) {
    throw ContractError("spectral_loss: shape mismatch");
  }
  const std::size_t n = est.data.size();
  if (n == 0) return 0.0;
  double mag = 0.0, cplx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double am, ar, ai, bm, br, bi;
    compressed(est.data[i], p, am, ar, ai);
    compressed(target.data[i], p, bm, br, bi);
    mag += (am - bm) * (am - bm);
    cplx += (ar - br) * (ar - br) + (ai - bi) * (ai - bi);
  }
  return w.magnitude * mag / static_cast<double>(n) + w.complex * cplx / (2.0 * static_cast<double>(n));
}

MaskTarget make_mask_target(const dsp::Spectrogram& noisy_ref, const dsp::Spectrogram& clean_ref, float p) {
  if (noisy_ref.frames != clean_ref.frames || noisy_ref.bins != clean_ref.bins) {
    throw ContractError("make_mask_target: shape mismatch");
  }
  MaskTarget t;
  t.frames = noisy_ref.frames;
  t.bins = noisy_ref.bins;
  const std::size_t n = noisy_ref.data.size();
  for (auto* v : {&t.noisy_mag, &t.noisy_re, &t.noisy_im, &t.clean_mag, &t.clean_re, &t.clean_im}) {
    v->resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    compressed(noisy_ref.data[i], p, t.noisy_mag[i], t.noisy_re[i], t.noisy_im[i]);
    compressed(clean_ref.data[i], p, t.clean_mag[i], t.clean_re[i], t.clean_im[i]);
  }
  return t;
}

template <typename Real>
nn::Var<Real> mask_loss(nn::Tape<Real>* tape, const nn::Var<Real>& mask, const MaskTarget& target,
                        const LossWeights& w) {
  const std::size_t n = target.frames * target.bins;
  if (mask->value.size() != n || n == 0) {
    throw ContractError("mask_loss: mask has " + std::to_string(mask->value.size()) +
                        " values, target " + std::to_string(n));
  }
  const double ka = w.magnitude / static_cast<double>(n);
  const double kb = w.complex / (2.0 * static_cast<double>(n));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = static_cast<double>(mask->value[i]);
    const double em = m * target.noisy_mag[i] - target.clean_mag[i];
    const double er = m * target.noisy_re[i] - target.clean_re[i];
    const double ei = m * target.noisy_im[i] - target.clean_im[i];
    total += ka * em * em + kb * (er * er + ei * ei);
  }
  auto out = nn::constant(nn::Tensor<Real>({1}, static_cast<Real>(total)));
  if (tape && mask->requires_grad) {
    out->requires_grad = true;
    nn::Var<Real> m_var = mask;
    // target is captured by reference and must outlive backward().
    tape->record([out, m_var, &target, ka, kb, n] {
      if (out->grad.empty()) return;
      const double g = static_cast<double>(out->grad[0]);
      auto& mg = m_var->grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        const double m = static_cast<double>(m_var->value[i]);
        const double em = m * target.noisy_mag[i] - target.clean_mag[i];
        const double er = m * target.noisy_re[i] - target.clean_re[i];
        const double ei = m * target.noisy_im[i] - target.clean_im[i];
        const double d = 2.0 * ka * em * target.noisy_mag[i] +
                         2.0 * kb * (er * target.noisy_re[i] + ei * target.noisy_im[i]);
        mg[i] += static_cast<Real>(g * d);
      }
    });
  }
  return out;
}

template nn::Var<float> mask_loss(nn::Tape<float>*, const nn::Var<float>&, const MaskTarget&,
                                  const LossWeights&);
template nn::Var<double> mask_loss(nn::Tape<double>*, const nn::Var<double>&, const MaskTarget&,
                                   const LossWeights&);

}  // namespace labnet::train
