// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "labnet/simd/kernels.hpp"

namespace labnet::simd {

#if defined(LABNET_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(LABNET_HAVE_NEON)
const KernelTable& neon_table();
#endif

const char* level_name(Level level) {
  switch (level) {
    case Level::kScalar: return "scalar";
    case Level::kAvx2: return "avx2";
    case Level::kNeon: return "neon";
  }
  return "unknown";
}

const KernelTable* avx2_kernels() {
#if defined(LABNET_HAVE_AVX2)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_kernels() {
#if defined(LABNET_HAVE_NEON)
  return &neon_table();
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* table_for(Level level) {
  switch (level) {
    case Level::kAvx2: return avx2_kernels();
    case Level::kNeon: return neon_kernels();
    case Level::kScalar: return &scalar_kernels();
  }
  return nullptr;
}

const KernelTable* pick_default() {
  if (const char* env = std::getenv("LABNET_SIMD")) {
    std::string_view want(env);
    if (want == "scalar") return &scalar_kernels();
    if (want == "avx2" && avx2_kernels()) return avx2_kernels();
    if (want == "neon" && neon_kernels()) return neon_kernels();
    return &scalar_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  if (const KernelTable* t = neon_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{pick_default()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

void set_active(Level level) {
  const KernelTable* t = table_for(level);
  slot().store(t ? t : &scalar_kernels(), std::memory_order_relaxed);
}

}  // namespace labnet::simd
