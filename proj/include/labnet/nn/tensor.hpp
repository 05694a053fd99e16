// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "labnet/common.hpp"

namespace labnet::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::size_t b) { return a * b; });
}

inline std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Dense row-major tensor.
template <typename Real>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real(0))
      : shape_(std::move(shape)), data_(numel(shape_), fill) {}
  Tensor(Shape shape, std::vector<Real> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != numel(shape_)) {
      throw ContractError("Tensor: data length " + std::to_string(data_.size()) +
                          " does not match shape " + shape_str(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }
  std::vector<Real>& storage() { return data_; }
  const std::vector<Real>& storage() const { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }

  // Product of all dims but the last; the "row" count for last-axis ops.
  std::size_t rows() const { return shape_.empty() ? 0 : data_.size() / shape_.back(); }
  std::size_t last() const { return shape_.empty() ? 0 : shape_.back(); }

  void reshape(Shape shape) {
    if (numel(shape) != data_.size()) {
      throw ContractError("reshape: " + shape_str(shape_) + " -> " + shape_str(shape));
    }
    shape_ = std::move(shape);
  }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename Other>
  Tensor<Other> cast() const {
    std::vector<Other> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<Other>(data_[i]);
    return Tensor<Other>(shape_, std::move(out));
  }

  bool all_finite() const {
    for (Real v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  Shape shape_;
  std::vector<Real> data_;
};

}  // namespace labnet::nn
