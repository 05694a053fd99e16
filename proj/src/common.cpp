// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/common.hpp"

#include <cstdlib>
#include <thread>

namespace labnet {

std::size_t num_threads() {
  if (const char* env = std::getenv("LABNET_NUM_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace labnet
