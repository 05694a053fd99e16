// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <type_traits>

#include "labnet/simd/reference.hpp"

namespace labnet::simd {

enum class Level { kScalar, kAvx2, kNeon };

const char* level_name(Level level);

// Function table for the 32-bit inner loops. Semantics match simd::ref.
struct KernelTable {
  Level level;
  void (*gemm)(const float* x, const float* w, const float* bias, float* y,
               std::size_t rows, std::size_t k, std::size_t m);
  void (*gemm_acc)(const float* x, const float* w, float* y, std::size_t rows,
                   std::size_t k, std::size_t m);
  void (*gemm_tn_acc)(const float* x, const float* dy, float* dw,
                      std::size_t rows, std::size_t k, std::size_t m);
  void (*gemm_nt_acc)(const float* dy, const float* w, float* dx,
                      std::size_t rows, std::size_t k, std::size_t m);
  float (*dot)(const float* a, const float* b, std::size_t n);
  void (*axpy)(float a, const float* x, float* y, std::size_t n);
  void (*mul)(const float* a, const float* b, float* out, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Best available table, chosen once at first use. LABNET_SIMD=scalar|avx2|neon
// forces a level (falls back to scalar if unavailable).
const KernelTable& active();

// Test hook: switch the active table. Not thread-safe against concurrent use.
void set_active(Level level);

// Typed front-end: float goes through the dispatched table, anything else
// through the scalar reference.
template <typename Real>
inline void gemm(const Real* x, const Real* w, const Real* bias, Real* y,
                 std::size_t rows, std::size_t k, std::size_t m) {
  if constexpr (std::is_same_v<Real, float>) {
    active().gemm(x, w, bias, y, rows, k, m);
  } else {
    ref::gemm(x, w, bias, y, rows, k, m);
  }
}

template <typename Real>
inline void gemm_acc(const Real* x, const Real* w, Real* y, std::size_t rows,
                     std::size_t k, std::size_t m) {
  if constexpr (std::is_same_v<Real, float>) {
    active().gemm_acc(x, w, y, rows, k, m);
  } else {
    ref::gemm_acc(x, w, y, rows, k, m);
  }
}

template <typename Real>
inline void gemm_tn_acc(const Real* x, const Real* dy, Real* dw,
                        std::size_t rows, std::size_t k, std::size_t m) {
  if constexpr (std::is_same_v<Real, float>) {
    active().gemm_tn_acc(x, dy, dw, rows, k, m);
  } else {
    ref::gemm_tn_acc(x, dy, dw, rows, k, m);
  }
}

template <typename Real>
inline void gemm_nt_acc(const Real* dy, const Real* w, Real* dx,
                        std::size_t rows, std::size_t k, std::size_t m) {
  if constexpr (std::is_same_v<Real, float>) {
    active().gemm_nt_acc(dy, w, dx, rows, k, m);
  } else {
    ref::gemm_nt_acc(dy, w, dx, rows, k, m);
  }
}

template <typename Real>
inline Real dot(const Real* a, const Real* b, std::size_t n) {
  if constexpr (std::is_same_v<Real, float>) {
    return active().dot(a, b, n);
  } else {
    return ref::dot(a, b, n);
  }
}

template <typename Real>
inline void axpy(Real a, const Real* x, Real* y, std::size_t n) {
  if constexpr (std::is_same_v<Real, float>) {
    active().axpy(a, x, y, n);
  } else {
    ref::axpy(a, x, y, n);
  }
}

}  // namespace labnet::simd
