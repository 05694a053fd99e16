// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/sim/room.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "labnet/common.hpp"

namespace labnet::sim {

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool RoomSpec::contains(const Vec3& p) const {
  return p[0] > 0.0 && p[0] < length && p[1] > 0.0 && p[1] < width && p[2] > 0.0 && p[2] < height;
}

double sabine_absorption(const RoomSpec& room) {
  if (!(room.t60 > 0.0)) throw InputError("room t60 must be positive");
  const double alpha = 0.161 * room.volume() / (room.surface() * room.t60);
  return std::clamp(alpha, 1e-6, 1.0);
}

namespace {
std::string fmt(const Vec3& p) {
  return "(" + std::to_string(p[0]) + ", " + std::to_string(p[1]) + ", " + std::to_string(p[2]) + ")";
}
}  // namespace

std::vector<double> simulate_rir(const RoomSpec& room, const Vec3& src, const Vec3& mic,
                                 const RirOptions& opt) {
  if (!(room.length > 0 && room.width > 0 && room.height > 0)) {
    throw InputError("room dimensions must be positive");
  }
  if (!room.contains(src)) throw InputError("source " + fmt(src) + " is outside the room");
  if (!room.contains(mic)) throw InputError("microphone " + fmt(mic) + " is outside the room");
  const double beta = opt.reflection >= 0.0 ? opt.reflection : std::sqrt(1.0 - sabine_absorption(room));
  const double fs = opt.sample_rate;
  const double c = room.speed_of_sound;
  const double direct = distance(src, mic);
  const std::size_t direct_tap = static_cast<std::size_t>(std::lround(direct / c * fs));
  const double length_s = opt.length_s > 0.0 ? opt.length_s : 1.5 * room.t60;
  const std::size_t len = std::max<std::size_t>(static_cast<std::size_t>(std::ceil(length_s * fs)),
                                                direct_tap + 1);
  std::vector<double> h(len, 0.0);

  const double max_dist = c * static_cast<double>(len) / fs;
  const Vec3 dims{room.length, room.width, room.height};
  std::array<int, 3> nmax{};
  for (int a = 0; a < 3; ++a) nmax[a] = static_cast<int>(std::ceil(max_dist / (2.0 * dims[a]))) + 1;

  // Image coordinate along one axis for (n, p): (1 - 2p) * s + 2 n L, with
  // |n - p| + |n| wall reflections.
  for (int nx = -nmax[0]; nx <= nmax[0]; ++nx) {
    for (int px = 0; px <= 1; ++px) {
      const double ix = (1 - 2 * px) * src[0] + 2.0 * nx * dims[0] - mic[0];
      const int rx = std::abs(nx - px) + std::abs(nx);
      for (int ny = -nmax[1]; ny <= nmax[1]; ++ny) {
        for (int py = 0; py <= 1; ++py) {
          const double iy = (1 - 2 * py) * src[1] + 2.0 * ny * dims[1] - mic[1];
          const int ry = std::abs(ny - py) + std::abs(ny);
          const double dxy2 = ix * ix + iy * iy;
          if (dxy2 > max_dist * max_dist) continue;
          for (int nz = -nmax[2]; nz <= nmax[2]; ++nz) {
            for (int pz = 0; pz <= 1; ++pz) {
              const double iz = (1 - 2 * pz) * src[2] + 2.0 * nz * dims[2] - mic[2];
              const int rz = std::abs(nz - pz) + std::abs(nz);
              const double d = std::sqrt(dxy2 + iz * iz);
              const auto tap = static_cast<std::size_t>(std::lround(d / c * fs));
              if (tap >= len) continue;
              const double amp = std::pow(beta, rx + ry + rz) / (4.0 * kPi * std::max(d, 1e-3));
              h[tap] += amp;
            }
          }
        }
      }
    }
  }
  return h;
}

std::vector<double> energy_decay_db(const std::vector<double>& rir) {
  std::vector<double> edc(rir.size());
  double acc = 0.0;
  for (std::size_t i = rir.size(); i-- > 0;) {
    acc += rir[i] * rir[i];
    edc[i] = acc;
  }
  const double total = edc.empty() ? 0.0 : edc[0];
  if (total <= 0.0) throw InputError("energy_decay_db: silent impulse response");
  for (double& v : edc) v = v > 0.0 ? 10.0 * std::log10(v / total) : -300.0;
  return edc;
}

double estimate_t60(const std::vector<double>& rir, int sample_rate) {
  const std::vector<double> edc = energy_decay_db(rir);
  // Least-squares line through the [-5, -35] dB segment.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    if (edc[i] > -5.0 || edc[i] < -35.0) continue;
    const double t = static_cast<double>(i) / sample_rate;
    sx += t;
    sy += edc[i];
    sxx += t * t;
    sxy += t * edc[i];
    ++n;
  }
  if (n < 2) throw InputError("estimate_t60: decay curve does not reach -35 dB");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (!(slope < 0.0)) throw InputError("estimate_t60: non-decaying response");
  return -60.0 / slope;
}

}  // namespace labnet::sim
