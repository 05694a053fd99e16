// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace labnet {

inline constexpr double kPi = 3.14159265358979323846;

// Bad user-supplied data: non-finite samples, mismatched lengths, silent refs.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an API precondition (shape mismatch, misuse of a tape).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Parameter file is truncated or disagrees with its own hyper block.
class CorruptModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Number of worker threads; LABNET_NUM_THREADS overrides hardware concurrency.
std::size_t num_threads();

}  // namespace labnet
