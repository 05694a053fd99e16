// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Scalar reference kernels. These define the numerics every vector variant
// must reproduce (up to FMA contraction) and serve the 64-bit gradient path.
//
// Layout convention: all matrices are row-major; x is rows x k, w is k x m,
// y/dy are rows x m. Each output row depends only on its own input row, so a
// batch of rows produces the same values as the rows evaluated one by one.

#pragma once

#include <cstddef>

namespace labnet::simd::ref {

template <typename Real>
void gemm(const Real* x, const Real* w, const Real* bias, Real* y,
          std::size_t rows, std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) {
    Real* yr = y + n * m;
    for (std::size_t j = 0; j < m; ++j) yr[j] = bias ? bias[j] : Real(0);
    const Real* xr = x + n * k;
    for (std::size_t i = 0; i < k; ++i) {
      const Real a = xr[i];
      const Real* wr = w + i * m;
      for (std::size_t j = 0; j < m; ++j) yr[j] += a * wr[j];
    }
  }
}

template <typename Real>
void gemm_acc(const Real* x, const Real* w, Real* y, std::size_t rows,
              std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) {
    Real* yr = y + n * m;
    const Real* xr = x + n * k;
    for (std::size_t i = 0; i < k; ++i) {
      const Real a = xr[i];
      const Real* wr = w + i * m;
      for (std::size_t j = 0; j < m; ++j) yr[j] += a * wr[j];
    }
  }
}

// dw += x^T dy
template <typename Real>
void gemm_tn_acc(const Real* x, const Real* dy, Real* dw, std::size_t rows,
                 std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) {
    const Real* xr = x + n * k;
    const Real* dr = dy + n * m;
    for (std::size_t i = 0; i < k; ++i) {
      const Real a = xr[i];
      if (a == Real(0)) continue;
      Real* wr = dw + i * m;
      for (std::size_t j = 0; j < m; ++j) wr[j] += a * dr[j];
    }
  }
}

// dx += dy w^T
template <typename Real>
void gemm_nt_acc(const Real* dy, const Real* w, Real* dx, std::size_t rows,
                 std::size_t k, std::size_t m) {
  for (std::size_t n = 0; n < rows; ++n) {
    const Real* dr = dy + n * m;
    Real* xr = dx + n * k;
    for (std::size_t i = 0; i < k; ++i) {
      const Real* wr = w + i * m;
      Real s = 0;
      for (std::size_t j = 0; j < m; ++j) s += dr[j] * wr[j];
      xr[i] += s;
    }
  }
}

template <typename Real>
Real dot(const Real* a, const Real* b, std::size_t n) {
  Real s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename Real>
void axpy(Real a, const Real* x, Real* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename Real>
void mul(const Real* a, const Real* b, Real* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

}  // namespace labnet::simd::ref
