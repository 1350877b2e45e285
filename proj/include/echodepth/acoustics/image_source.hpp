// Copyright 2026 The echodepth Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "echodepth/acoustics/types.hpp"

namespace echodepth::acoustics {

/// Image-source room impulse response for a shoebox.
///
/// Every image up to scene.max_reflection_order contributes one impulse at the
/// nearest sample to its arrival time, with amplitude
/// prod_w (1 - absorption_w)^(reflections on w) / (4 pi distance).
/// Images arriving after `duration` are dropped.
inline ImpulseResponse simulate_rir(const RoomScene& scene, const Vec3& source, const Vec3& receiver,
                                    double sample_rate, double duration) {
  scene.validate();
  require(scene.contains(source) && scene.contains(receiver), "source and receiver must lie inside the room");
  require(sample_rate > 0.0, "sample rate must be positive");
  const double direct = (source - receiver).norm();
  if (direct == 0.0) throw InvalidArgument("receiver coincides with source");
  const double c = scene.speed_of_sound;
  const std::size_t length = samples_for(duration, sample_rate);
  if (double(length) <= direct / c * sample_rate || length == 0) {
    throw InvalidArgument("duration is shorter than the direct path");
  }

  ImpulseResponse rir{std::vector<double>(length, 0.0), sample_rate};
  const int order = scene.max_reflection_order;
  const auto& L = scene.dimensions;
  std::array<double, 6> keep{};
  for (int w = 0; w < 6; ++w) keep[std::size_t(w)] = 1.0 - scene.absorption[std::size_t(w)];

  auto gain = [&](int wall, int count) { return count == 0 ? 1.0 : std::pow(keep[std::size_t(wall)], count); };

  // Axis a, lattice index n, parity q: image coordinate (1 - 2q) s + 2 n L with
  // |n - q| hits on the low wall and |n| hits on the high wall.
  for (int qx = 0; qx <= 1; ++qx)
    for (int qy = 0; qy <= 1; ++qy)
      for (int qz = 0; qz <= 1; ++qz)
        for (int nx = -order; nx <= order; ++nx) {
          const int rx = std::abs(nx - qx) + std::abs(nx);
          if (rx > order) continue;
          for (int ny = -order; ny <= order; ++ny) {
            const int ry = std::abs(ny - qy) + std::abs(ny);
            if (rx + ry > order) continue;
            for (int nz = -order; nz <= order; ++nz) {
              const int rz = std::abs(nz - qz) + std::abs(nz);
              if (rx + ry + rz > order) continue;
              const Vec3 image((1 - 2 * qx) * source.x() + 2.0 * nx * L.x(),
                               (1 - 2 * qy) * source.y() + 2.0 * ny * L.y(),
                               (1 - 2 * qz) * source.z() + 2.0 * nz * L.z());
              const double d = (image - receiver).norm();
              const auto index = std::llround(d / c * sample_rate);
              if (index < 0 || std::size_t(index) >= length) continue;
              const double amplitude =
                  gain(0, std::abs(nx - qx)) * gain(1, std::abs(nx)) * gain(2, std::abs(ny - qy)) *
                  gain(3, std::abs(ny)) * gain(4, std::abs(nz - qz)) * gain(5, std::abs(nz)) /
                  (4.0 * std::numbers::pi * d);
              rir.samples[std::size_t(index)] += amplitude;
            }
          }
        }
  return rir;
}

}  // namespace echodepth::acoustics
