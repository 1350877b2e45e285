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

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "echodepth/error.hpp"

namespace echodepth::acoustics {

using Vec3 = Eigen::Vector3d;

inline constexpr double kDefaultSampleRate = 44100.0;
inline constexpr double kDefaultSpeedOfSound = 343.0;
inline constexpr double kDefaultRecordingSeconds = 0.12;
inline constexpr double kDefaultMaxDepth = 10.0;

/// Wall order used by RoomScene::absorption.
enum class Wall : int { kMinX = 0, kMaxX, kMinY, kMaxY, kMinZ, kMaxZ };

/// Axis-aligned shoebox spanning [0, Lx] x [0, Ly] x [0, Lz].
struct RoomScene {
  Vec3 dimensions{4.0, 4.0, 3.0};
  Vec3 source_position{1.0, 1.0, 1.0};
  std::vector<Vec3> receiver_positions;
  Vec3 receiver_orientation{1.0, 0.0, 0.0};
  std::array<double, 6> absorption{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  double speed_of_sound = kDefaultSpeedOfSound;
  int max_reflection_order = 0;

  bool contains(const Vec3& p) const {
    for (int a = 0; a < 3; ++a) {
      if (!(p[a] > 0.0 && p[a] < dimensions[a])) return false;
    }
    return true;
  }

  /// Midpoint of the receiver array; the depth camera sits here.
  Vec3 receiver_midpoint() const {
    require(!receiver_positions.empty(), "scene has no receivers");
    Vec3 m = Vec3::Zero();
    for (const auto& r : receiver_positions) m += r;
    return m / double(receiver_positions.size());
  }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      require(std::isfinite(dimensions[a]) && dimensions[a] > 0.0, "room dimensions must be positive");
    }
    require(contains(source_position), "source must lie strictly inside the room");
    require(!receiver_positions.empty(), "scene needs at least one receiver");
    for (const auto& r : receiver_positions) {
      require(contains(r), "receivers must lie strictly inside the room");
    }
    if (receiver_positions.size() == 2) {
      require((receiver_positions[0] - receiver_positions[1]).norm() > 0.0,
              "binaural receivers must be separated");
    }
    for (double a : absorption) require(a >= 0.0 && a <= 1.0, "absorption must lie in [0, 1]");
    require(std::isfinite(speed_of_sound) && speed_of_sound > 0.0, "speed of sound must be positive");
    require(max_reflection_order >= 0, "reflection order must be non-negative");
  }
};

struct Waveform {
  std::vector<double> samples;
  double sample_rate = kDefaultSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration() const { return double(samples.size()) / sample_rate; }

  void validate() const {
    require(sample_rate > 0.0 && std::isfinite(sample_rate), "sample rate must be positive");
    for (double v : samples) require(std::isfinite(v), "waveform contains non-finite samples");
  }
};

/// h(t) between one source and one receiver.
struct ImpulseResponse {
  std::vector<double> samples;
  double sample_rate = kDefaultSampleRate;

  std::size_t size() const { return samples.size(); }
};

/// Row-major H x W grid of metric depths.
struct DepthMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;
  double max_depth = kDefaultMaxDepth;

  double at(int row, int col) const { return values[std::size_t(row) * std::size_t(width) + std::size_t(col)]; }
  double& at(int row, int col) { return values[std::size_t(row) * std::size_t(width) + std::size_t(col)]; }

  void validate() const {
    require(height > 0 && width > 0, "depth map must be non-empty");
    require(values.size() == std::size_t(height) * std::size_t(width), "depth map size mismatch");
    for (double v : values) require(v >= 0.0 && v <= max_depth, "depth outside [0, max_depth]");
  }
};

inline std::size_t samples_for(double seconds, double sample_rate) {
  return std::size_t(std::llround(seconds * sample_rate));
}

}  // namespace echodepth::acoustics
