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

#include "echodepth/dsp/highpass.hpp"
#include "echodepth/dsp/stft.hpp"

namespace echodepth::dsp {

/// Two-channel log(1 + |STFT|) features, left channel first. Bins above the
/// band's Nyquist are dropped.
inline Spectrogram make_features(const Waveform& left, const Waveform& right, const BandLimit& band,
                                 int window_size = kDefaultWindow, int hop = kDefaultHop) {
  require(left.size() == right.size(), "binaural channels differ in length");
  require(left.sample_rate == right.sample_rate, "binaural channels differ in sample rate");
  const Spectrogram l = stft(left, window_size, hop);
  const Spectrogram r = stft(right, window_size, hop);

  int kept = 0;
  while (kept < l.bins && l.bin_frequency(kept) <= band.nyquist) ++kept;

  Spectrogram out = l;
  out.channels = 2;
  out.bins = kept;
  out.cutoff_tag = band.cutoff;
  out.magnitudes.assign(std::size_t(2) * std::size_t(kept) * std::size_t(l.frames), 0.0);
  for (int f = 0; f < kept; ++f) {
    for (int t = 0; t < l.frames; ++t) {
      out.at(0, f, t) = std::log1p(l.at(0, f, t));
      out.at(1, f, t) = std::log1p(r.at(0, f, t));
    }
  }
  return out;
}

}  // namespace echodepth::dsp
