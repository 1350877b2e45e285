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
#include <numbers>

#include "echodepth/acoustics/types.hpp"

namespace echodepth::dsp {

using acoustics::Waveform;

struct ChirpSpec {
  double f_start = 1.0;
  double f_end = 22050.0;
  double duration = 0.05;
  double sample_rate = 44100.0;
  double amplitude = 1.0;

  void validate() const {
    require(f_start > 0.0 && f_start < f_end, "chirp needs 0 < f_start < f_end");
    require(f_end <= sample_rate / 2.0, "chirp end frequency exceeds Nyquist");
    require(duration > 0.0, "chirp duration must be positive");
  }
};

/// Linear sweep A sin(2 pi (f0 t + (f1 - f0) t^2 / (2 D))), whose
/// instantaneous frequency moves from f_start at t = 0 to f_end at t = D.
inline Waveform generate_chirp(const ChirpSpec& spec) {
  spec.validate();
  const std::size_t n = acoustics::samples_for(spec.duration, spec.sample_rate);
  const double rate = (spec.f_end - spec.f_start) / spec.duration;
  Waveform w{std::vector<double>(n), spec.sample_rate};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = double(i) / spec.sample_rate;
    w.samples[i] = spec.amplitude * std::sin(2.0 * std::numbers::pi * (spec.f_start * t + 0.5 * rate * t * t));
  }
  return w;
}

/// Zero-pads (or truncates) to `length` samples, e.g. to the recording window.
inline Waveform pad_to(Waveform w, std::size_t length) {
  w.samples.resize(length, 0.0);
  return w;
}

}  // namespace echodepth::dsp
