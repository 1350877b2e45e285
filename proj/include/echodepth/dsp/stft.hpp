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

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "echodepth/acoustics/types.hpp"
#include "echodepth/fft.hpp"

namespace echodepth::dsp {

using acoustics::Waveform;

inline constexpr int kDefaultWindow = 512;
inline constexpr int kDefaultHop = 128;

/// Magnitudes stored channel-major, then frequency, then time:
/// index = (c * bins + f) * frames + t.
struct Spectrogram {
  int channels = 1;
  int bins = 0;
  int frames = 0;
  std::vector<double> magnitudes;
  int window_size = kDefaultWindow;
  int hop = kDefaultHop;
  double sample_rate = 44100.0;
  double cutoff_tag = 0.0;

  std::size_t index(int c, int f, int t) const {
    return (std::size_t(c) * std::size_t(bins) + std::size_t(f)) * std::size_t(frames) + std::size_t(t);
  }
  double at(int c, int f, int t) const { return magnitudes[index(c, f, t)]; }
  double& at(int c, int f, int t) { return magnitudes[index(c, f, t)]; }
  std::size_t size() const { return magnitudes.size(); }
  bool same_shape(const Spectrogram& o) const {
    return channels == o.channels && bins == o.bins && frames == o.frames;
  }
  double bin_frequency(int f) const { return double(f) * sample_rate / double(window_size); }
};

/// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / N).
inline std::vector<double> hann_window(int size) {
  std::vector<double> w(static_cast<std::size_t>(size));
  for (int n = 0; n < size; ++n) w[std::size_t(n)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / size);
  return w;
}

/// Number of frames needed to cover `length` samples, zero-padding the tail.
inline int frame_count(std::size_t length, int window_size, int hop) {
  const std::size_t excess = length > std::size_t(window_size) ? length - std::size_t(window_size) : 0;
  return int((excess + std::size_t(hop) - 1) / std::size_t(hop)) + 1;
}

inline Spectrogram stft(const Waveform& signal, int window_size = kDefaultWindow, int hop = kDefaultHop) {
  require(window_size > 0 && std::has_single_bit(unsigned(window_size)), "window size must be a power of two");
  require(hop > 0 && hop <= window_size, "hop must lie in (0, window]");
  require(signal.size() >= std::size_t(window_size), "signal shorter than one window");

  Spectrogram s;
  s.window_size = window_size;
  s.hop = hop;
  s.sample_rate = signal.sample_rate;
  s.bins = window_size / 2 + 1;
  s.frames = frame_count(signal.size(), window_size, hop);
  s.magnitudes.assign(std::size_t(s.bins) * std::size_t(s.frames), 0.0);

  const auto window = hann_window(window_size);
  Eigen::FFT<double> fft;
  std::vector<double> frame(static_cast<std::size_t>(window_size));
  std::vector<std::complex<double>> spectrum;
  for (int t = 0; t < s.frames; ++t) {
    const std::size_t start = std::size_t(t) * std::size_t(hop);
    for (int n = 0; n < window_size; ++n) {
      const std::size_t i = start + std::size_t(n);
      frame[std::size_t(n)] = i < signal.size() ? signal.samples[i] * window[std::size_t(n)] : 0.0;
    }
    real_spectrum(fft, frame, spectrum);
    for (int f = 0; f < s.bins; ++f) s.at(0, f, t) = std::abs(spectrum[std::size_t(f)]);
  }
  return s;
}

}  // namespace echodepth::dsp
