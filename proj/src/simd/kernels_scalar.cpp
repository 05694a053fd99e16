// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/simd/kernels.hpp"

namespace labnet::simd {

namespace {

void gemm_scalar(const float* x, const float* w, const float* bias, float* y,
                 std::size_t rows, std::size_t k, std::size_t m) {
  ref::gemm(x, w, bias, y, rows, k, m);
}
void gemm_acc_scalar(const float* x, const float* w, float* y,
                     std::size_t rows, std::size_t k, std::size_t m) {
  ref::gemm_acc(x, w, y, rows, k, m);
}
void gemm_tn_acc_scalar(const float* x, const float* dy, float* dw,
                        std::size_t rows, std::size_t k, std::size_t m) {
  ref::gemm_tn_acc(x, dy, dw, rows, k, m);
}
void gemm_nt_acc_scalar(const float* dy, const float* w, float* dx,
                        std::size_t rows, std::size_t k, std::size_t m) {
  ref::gemm_nt_acc(dy, w, dx, rows, k, m);
}
float dot_scalar(const float* a, const float* b, std::size_t n) {
  return ref::dot(a, b, n);
}
void axpy_scalar(float a, const float* x, float* y, std::size_t n) {
  ref::axpy(a, x, y, n);
}
void mul_scalar(const float* a, const float* b, float* out, std::size_t n) {
  ref::mul(a, b, out, n);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Level::kScalar,     gemm_scalar,
                                 gemm_acc_scalar,    gemm_tn_acc_scalar,
                                 gemm_nt_acc_scalar, dot_scalar,
                                 axpy_scalar,        mul_scalar};
  return table;
}

}  // namespace labnet::simd
