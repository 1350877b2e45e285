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
#include <vector>

#include "echodepth/acoustics/types.hpp"
#include "echodepth/fft.hpp"

namespace echodepth::dsp {

using acoustics::Waveform;

inline constexpr std::size_t kDefaultHighpassTaps = 1023;

struct BandLimit {
  double cutoff = 0.0;
  double nyquist = 22050.0;

  void validate() const {
    require(cutoff >= 0.0 && cutoff < nyquist, "high-pass cutoff must lie in [0, nyquist)");
  }
};

using FilterKernel = std::vector<double>;

/// Even-symmetric Hann-windowed sinc high-pass built by spectral inversion of a
/// unit-DC-gain low-pass. Cutoffs finer than one kernel resolution bin
/// (fs / taps) cannot be realized and yield the identity kernel.
inline FilterKernel design_highpass(const BandLimit& band, double fs, std::size_t taps = kDefaultHighpassTaps) {
  band.validate();
  require(std::abs(fs - 2.0 * band.nyquist) < 1e-9 * fs, "sample rate must equal twice the band's Nyquist");
  require(taps % 2 == 1, "kernel length must be odd");
  const std::size_t mid = taps / 2;
  FilterKernel h(taps, 0.0);
  if (band.cutoff < fs / double(taps)) {
    h[mid] = 1.0;
    return h;
  }
  const double fc = band.cutoff / fs;
  double dc = 0.0;
  for (std::size_t i = 0; i < taps; ++i) {
    const double m = double(i) - double(mid);
    const double sinc = m == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
    const double window = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i + 1) / double(taps + 1));
    h[i] = sinc * window;
    dc += h[i];
  }
  // Mirror pairs are summed in the same order so the taps stay exactly symmetric.
  for (std::size_t i = 0; i < mid; ++i) {
    const double v = -h[i] / dc;
    h[i] = v;
    h[taps - 1 - i] = v;
  }
  h[mid] = 1.0 - h[mid] / dc;
  return h;
}

/// Convolution aligned by the kernel's group delay so the output keeps the
/// input's length and timing.
inline Waveform apply_filter(const FilterKernel& kernel, const Waveform& signal) {
  require(kernel.size() % 2 == 1, "kernel length must be odd");
  require(kernel.size() <= signal.size(), "kernel longer than signal");
  const std::size_t delay = kernel.size() / 2;
  bool identity = kernel[delay] == 1.0;
  for (std::size_t i = 0; identity && i < kernel.size(); ++i) identity = i == delay || kernel[i] == 0.0;
  if (identity) return signal;
  const auto full = fft_convolve(signal.samples, kernel);
  Waveform out{std::vector<double>(signal.size()), signal.sample_rate};
  for (std::size_t i = 0; i < signal.size(); ++i) out.samples[i] = full[i + delay];
  return out;
}

}  // namespace echodepth::dsp
