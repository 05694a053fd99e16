// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// AVX2 + FMA variants. Compiled with -mavx2 -mfma; only reached after the
// dispatcher has confirmed CPU support.

#include <immintrin.h>

#include "labnet/simd/kernels.hpp"

namespace labnet::simd {

namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

// One output row: yr (= init or yr) += xr . w, vectorised over columns.
inline void row_gemm(const float* xr, const float* w, float* yr, std::size_t k,
                     std::size_t m) {
  std::size_t j = 0;
  for (; j + 32 <= m; j += 32) {
    __m256 c0 = _mm256_loadu_ps(yr + j);
    __m256 c1 = _mm256_loadu_ps(yr + j + 8);
    __m256 c2 = _mm256_loadu_ps(yr + j + 16);
    __m256 c3 = _mm256_loadu_ps(yr + j + 24);
    for (std::size_t i = 0; i < k; ++i) {
      const __m256 a = _mm256_broadcast_ss(xr + i);
      const float* wr = w + i * m + j;
      c0 = _mm256_fmadd_ps(a, _mm256_loadu_ps(wr), c0);
      c1 = _mm256_fmadd_ps(a, _mm256_loadu_ps(wr + 8), c1);
      c2 = _mm256_fmadd_ps(a, _mm256_loadu_ps(wr + 16), c2);
      c3 = _mm256_fmadd_ps(a, _mm256_loadu_ps(wr + 24), c3);
    }
    _mm256_storeu_ps(yr + j, c0);
    _mm256_storeu_ps(yr + j + 8, c1);
    _mm256_storeu_ps(yr + j + 16, c2);
    _mm256_storeu_ps(yr + j + 24, c3);
  }
  for (; j + 8 <= m; j += 8) {
    __m256 c0 = _mm256_loadu_ps(yr + j);
    for (std::size_t i = 0; i < k; ++i) {
      c0 = _mm256_fmadd_ps(_mm256_broadcast_ss(xr + i),
                           _mm256_loadu_ps(w + i * m + j), c0);
    }
    _mm256_storeu_ps(yr + j, c0);
  }
  for (; j < m; ++j) {
    float c = yr[j];
    for (std::size_t i = 0; i < k; ++i) c = __builtin_fmaf(xr[i], w[i * m + j], c);
    yr[j] = c;
  }
}

void gemm_avx2(const float* x, const float* w, const float* bias, float* y,
               std::size_t rows, std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) {
    float* yr = y + n * m;
    if (bias) {
      for (std::size_t j = 0; j < m; ++j) yr[j] = bias[j];
    } else {
      for (std::size_t j = 0; j < m; ++j) yr[j] = 0.0f;
    }
    row_gemm(x + n * k, w, yr, k, m);
  }
}

void gemm_acc_avx2(const float* x, const float* w, float* y, std::size_t rows,
                   std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) row_gemm(x + n * k, w, y + n * m, k, m);
}

void axpy_avx2(float a, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] = __builtin_fmaf(a, x[i], y[i]);
}

void gemm_tn_acc_avx2(const float* x, const float* dy, float* dw,
                      std::size_t rows, std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) {
    const float* xr = x + n * k;
    const float* dr = dy + n * m;
    for (std::size_t i = 0; i < k; ++i) {
      if (xr[i] == 0.0f) continue;
      axpy_avx2(xr[i], dr, dw + i * m, m);
    }
  }
}

float dot_avx2(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8),
                           acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  }
  float s = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) s = __builtin_fmaf(a[i], b[i], s);
  return s;
}

void gemm_nt_acc_avx2(const float* dy, const float* w, float* dx,
                      std::size_t rows, std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) {
    const float* dr = dy + n * m;
    float* xr = dx + n * k;
    for (std::size_t i = 0; i < k; ++i) xr[i] += dot_avx2(dr, w + i * m, m);
  }
}

void mul_avx2(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i,
                     _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Level::kAvx2,    gemm_avx2,    gemm_acc_avx2,
                                 gemm_tn_acc_avx2, gemm_nt_acc_avx2, dot_avx2,
                                 axpy_avx2,        mul_avx2};
  return table;
}

}  // namespace labnet::simd
