// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/dsp/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace labnet::dsp {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  std::vector<double> re(n);
  std::vector<std::complex<double>> co(n / 2 + 1);
  auto* cbuf = reinterpret_cast<fftw_complex*>(co.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(), cbuf, flags);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), cbuf, re.data(),
                                       flags | FFTW_DESTROY_INPUT);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RealFft::forward(const double* in, std::complex<double>* out) const {
  std::vector<double> buf(in, in + n_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), buf.data(),
                       reinterpret_cast<fftw_complex*>(out));
}

void RealFft::inverse(const std::complex<double>* in, double* out) const {
  std::vector<std::complex<double>> buf(in, in + bins());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(buf.data()), out);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] *= scale;
}

const RealFft& real_fft(std::size_t n) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  std::size_t n = 1;
  while (n < out_len) n <<= 1;
  const RealFft& fft = real_fft(n);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<std::complex<double>> fa(fft.bins()), fb(fft.bins());
  fft.forward(pa.data(), fa.data());
  fft.forward(pb.data(), fb.data());
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  fft.inverse(fa.data(), pa.data());
  pa.resize(out_len);
  return pa;
}

}  // namespace labnet::dsp
