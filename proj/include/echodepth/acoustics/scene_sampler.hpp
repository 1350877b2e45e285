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
#include <cstdint>
#include <numbers>
#include <random>

#include "echodepth/acoustics/types.hpp"

namespace echodepth::acoustics {

/// Randomization ranges for synthetic scenes. The head faces +x (the long
/// axis) from near the room center, so the echo delays fix the room scale and
/// with it the depth map. The source sits just above the binaural midpoint,
/// like a speaker mounted on the sensing head.
struct SceneRanges {
  double min_length = 3.0, max_length = 8.0;   // Lx
  double min_aspect = 0.6, max_aspect = 0.9;   // Ly / Lx
  double min_height = 2.8, max_height = 2.8;   // Lz
  double min_head_x = 0.45, max_head_x = 0.55; // fraction of Lx
  double min_head_y = 0.5, max_head_y = 0.5;   // fraction of Ly
  double min_head_height = 1.4, max_head_height = 1.4;
  double yaw_range_degrees = 0.0;  // view yaw drawn from +-range around +x
  double receiver_spacing = 0.2;
  double source_offset = 0.1;  // meters above the receiver midpoint
  double min_absorption = 0.3, max_absorption = 0.3;
  int max_reflection_order = 10;
  double speed_of_sound = kDefaultSpeedOfSound;

  void validate() const {
    auto ordered = [](double lo, double hi) { return std::isfinite(lo) && std::isfinite(hi) && lo <= hi; };
    require(ordered(min_length, max_length) && min_length > 0.0, "invalid room length range");
    require(ordered(min_aspect, max_aspect) && min_aspect > 0.0, "invalid aspect range");
    require(ordered(min_height, max_height) && min_height > 0.0, "invalid room height range");
    require(ordered(min_head_x, max_head_x) && min_head_x > 0.0 && max_head_x < 1.0, "head x fraction must lie in (0, 1)");
    require(ordered(min_head_y, max_head_y) && min_head_y > 0.0 && max_head_y < 1.0, "head y fraction must lie in (0, 1)");
    require(ordered(min_head_height, max_head_height) && min_head_height > 0.0, "invalid head height range");
    require(max_head_height + source_offset < min_height, "head and source must fit under the ceiling");
    require(yaw_range_degrees >= 0.0 && yaw_range_degrees < 90.0, "yaw range must lie in [0, 90)");
    require(receiver_spacing > 0.0 && source_offset >= 0.0, "invalid receiver geometry");
    require(ordered(min_absorption, max_absorption) && min_absorption >= 0.0 && max_absorption < 1.0,
            "absorption must lie in [0, 1)");
    require(max_reflection_order >= 0 && speed_of_sound > 0.0, "invalid propagation settings");
  }
};

inline RoomScene sample_scene(const SceneRanges& r, std::uint64_t seed) {
  r.validate();
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  RoomScene s;
  const double lx = uniform(r.min_length, r.max_length);
  s.dimensions = Vec3(lx, lx * uniform(r.min_aspect, r.max_aspect), uniform(r.min_height, r.max_height));
  const Vec3 head(s.dimensions.x() * uniform(r.min_head_x, r.max_head_x),
                  s.dimensions.y() * uniform(r.min_head_y, r.max_head_y),
                  uniform(r.min_head_height, r.max_head_height));
  const double yaw = r.yaw_range_degrees > 0.0
                         ? uniform(-r.yaw_range_degrees, r.yaw_range_degrees) * std::numbers::pi / 180.0
                         : 0.0;
  s.receiver_orientation = Vec3(std::cos(yaw), std::sin(yaw), 0.0);
  const Vec3 left_axis(-std::sin(yaw), std::cos(yaw), 0.0);
  s.receiver_positions = {head + 0.5 * r.receiver_spacing * left_axis, head - 0.5 * r.receiver_spacing * left_axis};
  s.source_position = head + Vec3(0.0, 0.0, r.source_offset);
  for (auto& a : s.absorption) a = uniform(r.min_absorption, r.max_absorption);
  s.speed_of_sound = r.speed_of_sound;
  s.max_reflection_order = r.max_reflection_order;
  s.validate();
  return s;
}

}  // namespace echodepth::acoustics
