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

#include "echodepth/acoustics/types.hpp"
#include "echodepth/fft.hpp"

namespace echodepth::acoustics {

/// y(t) = sum_{k=0}^{t} h(t - k) x(k), evaluated in the frequency domain and
/// truncated or zero-padded to `output_length` samples.
inline Waveform convolve(const ImpulseResponse& rir, const Waveform& source_signal, std::size_t output_length) {
  if (rir.sample_rate != source_signal.sample_rate) {
    throw InvalidArgument("impulse response and signal sample rates differ");
  }
  Waveform out{std::vector<double>(output_length, 0.0), source_signal.sample_rate};
  if (rir.samples.empty() || source_signal.samples.empty()) return out;
  // Only the first output_length samples of each operand can reach the output.
  const auto h = std::span<const double>(rir.samples).first(std::min(rir.size(), output_length));
  const auto x = std::span<const double>(source_signal.samples).first(std::min(source_signal.size(), output_length));
  const auto full = fft_convolve(h, x);
  std::copy_n(full.begin(), std::min(full.size(), output_length), out.samples.begin());
  return out;
}

/// Convolution truncated to the default recording length.
inline Waveform convolve(const ImpulseResponse& rir, const Waveform& source_signal) {
  return convolve(rir, source_signal, samples_for(kDefaultRecordingSeconds, source_signal.sample_rate));
}

}  // namespace echodepth::acoustics
