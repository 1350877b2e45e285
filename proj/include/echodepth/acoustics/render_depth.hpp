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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "echodepth/acoustics/types.hpp"

namespace echodepth::acoustics {

/// Distance from `origin` along unit `dir` to the first box plane hit.
inline double ray_box_exit(const Vec3& origin, const Vec3& dir, const Vec3& dimensions) {
  double t = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0) t = std::min(t, (dimensions[a] - origin[a]) / dir[a]);
    if (dir[a] < 0.0) t = std::min(t, -origin[a] / dir[a]);
  }
  return t;
}

/// Pinhole depth render from the receiver midpoint. `fov_degrees` is the
/// horizontal field of view; pixels are square. Values are Euclidean ray
/// lengths clamped to [0, max_depth].
inline DepthMap render_depth(const RoomScene& scene, int height, int width, double fov_degrees,
                             double max_depth = kDefaultMaxDepth) {
  require(height > 0 && width > 0, "resolution must be positive");
  require(fov_degrees > 0.0 && fov_degrees < 180.0, "fov must lie in (0, 180) degrees");
  require(max_depth > 0.0, "max_depth must be positive");
  const double norm = scene.receiver_orientation.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidArgument("degenerate receiver orientation");
  require(std::abs(norm - 1.0) < 1e-9, "receiver orientation must be unit length");

  const Vec3 forward = scene.receiver_orientation / norm;
  const Vec3 world_up = std::abs(forward.z()) > 0.999 ? Vec3(0.0, 1.0, 0.0) : Vec3(0.0, 0.0, 1.0);
  const Vec3 right = forward.cross(world_up).normalized();
  const Vec3 up = right.cross(forward);
  const Vec3 origin = scene.receiver_midpoint();
  require(scene.contains(origin), "camera must lie inside the room");

  const double half = std::tan(fov_degrees * std::numbers::pi / 360.0);
  DepthMap map{height, width, std::vector<double>(std::size_t(height) * std::size_t(width)), max_depth};
  for (int i = 0; i < height; ++i) {
    const double v = (1.0 - 2.0 * (i + 0.5) / height) * half * double(height) / double(width);
    for (int j = 0; j < width; ++j) {
      const double u = (2.0 * (j + 0.5) / width - 1.0) * half;
      const Vec3 dir = (forward + u * right + v * up).normalized();
      map.at(i, j) = std::clamp(ray_box_exit(origin, dir, scene.dimensions), 0.0, max_depth);
    }
  }
  return map;
}

}  // namespace echodepth::acoustics
