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

#include <utility>

#include "echodepth/acoustics/convolve.hpp"
#include "echodepth/acoustics/image_source.hpp"

namespace echodepth::acoustics {

struct BinauralEcho {
  Waveform left;
  Waveform right;
};

/// Binaural impulse responses for the scene's source and receiver pair.
inline std::pair<ImpulseResponse, ImpulseResponse> simulate_binaural_rirs(const RoomScene& scene, double sample_rate,
                                                                          double duration) {
  require(scene.receiver_positions.size() == 2, "binaural synthesis needs exactly two receivers");
  return {simulate_rir(scene, scene.source_position, scene.receiver_positions[0], sample_rate, duration),
          simulate_rir(scene, scene.source_position, scene.receiver_positions[1], sample_rate, duration)};
}

/// Echo observed at each receiver when the source emits `source_signal`.
inline BinauralEcho synthesize_echo(const RoomScene& scene, const Waveform& source_signal, double duration) {
  const auto [h_left, h_right] = simulate_binaural_rirs(scene, source_signal.sample_rate, duration);
  const std::size_t length = samples_for(duration, source_signal.sample_rate);
  return {convolve(h_left, source_signal, length), convolve(h_right, source_signal, length)};
}

}  // namespace echodepth::acoustics
