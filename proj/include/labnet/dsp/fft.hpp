// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace labnet::dsp {

// Real-input FFT of a fixed size backed by FFTW (double precision). Plans are
// created once per size under a lock; execution is re-entrant.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // in: size() samples, out: bins() coefficients (unnormalised).
  void forward(const double* in, std::complex<double>* out) const;
  // in: bins() coefficients, out: size() samples, scaled by 1/size().
  // Imaginary parts of DC and Nyquist are ignored.
  void inverse(const std::complex<double>* in, double* out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

// Shared instance for size n (cached for the process lifetime).
const RealFft& real_fft(std::size_t n);

// Linear convolution of a and b (length a+b-1) via zero-padded FFT.
std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b);

}  // namespace labnet::dsp
