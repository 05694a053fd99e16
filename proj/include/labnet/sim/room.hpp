// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

namespace labnet::sim {

using Vec3 = std::array<double, 3>;

double distance(const Vec3& a, const Vec3& b);

struct RoomSpec {
  double length = 6.0;  // x, m
  double width = 5.0;   // y, m
  double height = 3.0;  // z, m
  double t60 = 0.3;     // s
  double speed_of_sound = 343.0;

  double volume() const { return length * width * height; }
  double surface() const { return 2.0 * (length * width + length * height + width * height); }
  bool contains(const Vec3& p) const;
};

// Uniform absorption from Sabine's formula, clamped to (0, 1].
double sabine_absorption(const RoomSpec& room);

struct RirOptions {
  int sample_rate = 16000;
  // Wall pressure reflection coefficient; negative = sqrt(1 - sabine_absorption).
  double reflection = -1.0;
  // RIR length in seconds; non-positive = 1.5 * t60.
  double length_s = 0.0;
};

// Allen-Berkley image-method RIR. Each image contributes
// beta^(reflections) / (4 pi d) at sample round(d / c * fs).
// Throws InputError when src or mic is not strictly inside the room.
std::vector<double> simulate_rir(const RoomSpec& room, const Vec3& src, const Vec3& mic,
                                 const RirOptions& opt = {});

// Schroeder backward-integrated energy decay curve in dB (0 dB at t = 0).
std::vector<double> energy_decay_db(const std::vector<double>& rir);

// T60 from a line fit of the decay curve between -5 and -35 dB (T30).
double estimate_t60(const std::vector<double>& rir, int sample_rate);

}  // namespace labnet::sim
