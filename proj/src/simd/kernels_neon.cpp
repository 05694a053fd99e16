// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// NEON variants for aarch64 builds.

#include <arm_neon.h>

#include "labnet/simd/kernels.hpp"

namespace labnet::simd {

namespace {

inline void row_gemm(const float* xr, const float* w, float* yr, std::size_t k,
                     std::size_t m) {
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    float32x4_t c = vld1q_f32(yr + j);
    for (std::size_t i = 0; i < k; ++i) {
      c = vfmaq_n_f32(c, vld1q_f32(w + i * m + j), xr[i]);
    }
    vst1q_f32(yr + j, c);
  }
  for (; j < m; ++j) {
    float c = yr[j];
    for (std::size_t i = 0; i < k; ++i) c = __builtin_fmaf(xr[i], w[i * m + j], c);
    yr[j] = c;
  }
}

void gemm_neon(const float* x, const float* w, const float* bias, float* y,
               std::size_t rows, std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) {
    float* yr = y + n * m;
    for (std::size_t j = 0; j < m; ++j) yr[j] = bias ? bias[j] : 0.0f;
    row_gemm(x + n * k, w, yr, k, m);
  }
}

void gemm_acc_neon(const float* x, const float* w, float* y, std::size_t rows,
                   std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) row_gemm(x + n * k, w, y + n * m, k, m);
}

void axpy_neon(float a, const float* x, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f32(y + i, vfmaq_n_f32(vld1q_f32(y + i), vld1q_f32(x + i), a));
  }
  for (; i < n; ++i) y[i] = __builtin_fmaf(a, x[i], y[i]);
}

void gemm_tn_acc_neon(const float* x, const float* dy, float* dw,
                      std::size_t rows, std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) {
    for (std::size_t i = 0; i < k; ++i) {
      const float a = x[n * k + i];
      if (a != 0.0f) axpy_neon(a, dy + n * m, dw + i * m, m);
    }
  }
}

float dot_neon(const float* a, const float* b, std::size_t n) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = vfmaq_f32(acc, vld1q_f32(a + i), vld1q_f32(b + i));
  float s = vaddvq_f32(acc);
  for (; i < n; ++i) s = __builtin_fmaf(a[i], b[i], s);
  return s;
}

void gemm_nt_acc_neon(const float* dy, const float* w, float* dx,
                      std::size_t rows, std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) {
    for (std::size_t i = 0; i < k; ++i) dx[n * k + i] += dot_neon(dy + n * m, w + i * m, m);
  }
}

void mul_neon(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(out + i, vmulq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{Level::kNeon,     gemm_neon,    gemm_acc_neon,
                                 gemm_tn_acc_neon, gemm_nt_acc_neon, dot_neon,
                                 axpy_neon,        mul_neon};
  return table;
}

}  // namespace labnet::simd
