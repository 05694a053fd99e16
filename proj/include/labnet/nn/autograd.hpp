// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

// Minimal reverse-mode differentiation: every op that runs with a Tape
// pushes a closure holding its saved activations; Tape::backward replays the
// closures once each, newest first.

#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "labnet/common.hpp"
#include "labnet/nn/tensor.hpp"

namespace labnet::nn {

template <typename Real>
struct Node {
  Tensor<Real> value;
  Tensor<Real> grad;
  bool requires_grad = false;

  // Gradient storage, zero-initialised on first touch.
  Tensor<Real>& grad_buffer() {
    if (grad.size() != value.size()) grad = Tensor<Real>(value.shape());
    return grad;
  }
  void zero_grad() { grad = Tensor<Real>(); }
};

template <typename Real>
using Var = std::shared_ptr<Node<Real>>;

template <typename Real>
Var<Real> constant(Tensor<Real> value) {
  auto n = std::make_shared<Node<Real>>();
  n->value = std::move(value);
  return n;
}

template <typename Real>
Var<Real> parameter(Tensor<Real> value) {
  auto n = std::make_shared<Node<Real>>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

template <typename Real>
class Tape {
 public:
  void record(std::function<void()> backward_fn) { entries_.push_back(std::move(backward_fn)); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  void clear() { entries_.clear(); }

  // Seeds d(loss)/d(loss) = loss_grad and runs every entry once in reverse.
  // The tape is consumed.
  void backward(const Var<Real>& loss, Real loss_grad = Real(1)) {
    if (entries_.empty()) throw ContractError("backward: tape is empty (no recorded forward pass)");
    if (!loss || loss->value.size() != 1) {
      throw ContractError("backward: loss must be a scalar");
    }
    if (!loss->requires_grad) throw ContractError("backward: loss does not depend on parameters");
    loss->grad_buffer()[0] += loss_grad;
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
    entries_.clear();
  }

 private:
  std::vector<std::function<void()>> entries_;
};

}  // namespace labnet::nn
