// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Generators and comparison helpers shared by the test suites. Comparisons
// go through complex<double> so real and complex containers both work.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "labnet/nn/autograd.hpp"
#include "labnet/nn/tensor.hpp"
#include "labnet/util/random.hpp"

namespace labnet::testing {

inline std::vector<float> noise(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<float> x(n);
  for (auto& v : x) v = static_cast<float>(scale * normal(rng));
  return x;
}

inline std::vector<std::vector<float>> multichannel(Rng& rng, std::size_t c, std::size_t n,
                                                    double scale = 0.1) {
  std::vector<std::vector<float>> out;
  for (std::size_t i = 0; i < c; ++i) out.push_back(noise(rng, n, scale));
  return out;
}

template <typename Real>
nn::Tensor<Real> tensor(Rng& rng, nn::Shape shape, double lo = -1.0, double hi = 1.0) {
  nn::Tensor<Real> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<Real>(uniform(rng, lo, hi));
  return t;
}

template <typename Real>
nn::Var<Real> param(Rng& rng, nn::Shape shape, double lo = -1.0, double hi = 1.0) {
  return nn::parameter(tensor<Real>(rng, std::move(shape), lo, hi));
}

template <typename A, typename B>
double max_abs_diff(const A& a, const B& b) {
  double m = 0.0;
  const std::size_t n = std::min<std::size_t>(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    m = std::max(m, std::abs(std::complex<double>(a[i]) - std::complex<double>(b[i])));
  }
  return m;
}

template <typename A>
double max_abs(const A& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(std::complex<double>(a[i])));
  return m;
}

}  // namespace labnet::testing
