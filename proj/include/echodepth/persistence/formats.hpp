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
#include <sstream>
#include <string>

#include "echodepth/acoustics/types.hpp"
#include "echodepth/dsp/stft.hpp"
#include "echodepth/nn/network.hpp"
#include "echodepth/persistence/binary_io.hpp"
#include "echodepth/persistence/config.hpp"

namespace echodepth::persistence {

// Every binary artifact starts with a four-byte magic tag and a u32 format
// version; readers refuse any other version. See docs/formats.md.

inline constexpr std::uint32_t kWaveformVersion = 1;
inline constexpr std::uint32_t kSpectrogramVersion = 1;
inline constexpr std::uint32_t kDepthVersion = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Waveforms: "EDWF", version, f64 sample_rate, u32 channels, u64 frames,
// then interleaved f32 samples.

inline std::vector<unsigned char> encode_waveforms(const std::vector<acoustics::Waveform>& channels) {
  require(!channels.empty(), "no channels to encode");
  const auto frames = channels.front().size();
  for (const auto& c : channels) {
    require(c.size() == frames && c.sample_rate == channels.front().sample_rate, "channels must agree");
  }
  ByteWriter w;
  w.magic("EDWF");
  w.u32(kWaveformVersion);
  w.f64(channels.front().sample_rate);
  w.u32(std::uint32_t(channels.size()));
  w.u64(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& c : channels) w.f32(float(c.samples[i]));
  }
  return w.bytes();
}

inline std::vector<acoustics::Waveform> decode_waveforms(std::vector<unsigned char> bytes,
                                                         const std::string& source = "waveform") {
  ByteReader r(std::move(bytes), source);
  r.expect_magic("EDWF");
  r.expect_version(kWaveformVersion);
  const double fs = r.f64();
  const std::uint32_t count = r.u32();
  const std::uint64_t frames = r.u64();
  std::vector<acoustics::Waveform> out(count, acoustics::Waveform{std::vector<double>(frames), fs});
  for (std::uint64_t i = 0; i < frames; ++i) {
    for (auto& c : out) c.samples[i] = r.f32();
  }
  r.expect_end();
  return out;
}

// Spectrograms: "EDSP", version, u32 channels, bins, frames, window, hop,
// f64 sample_rate, f64 cutoff_tag, then f32 magnitudes (channel, bin, frame).

inline std::vector<unsigned char> encode_spectrogram(const dsp::Spectrogram& s) {
  ByteWriter w;
  w.magic("EDSP");
  w.u32(kSpectrogramVersion);
  w.u32(std::uint32_t(s.channels));
  w.u32(std::uint32_t(s.bins));
  w.u32(std::uint32_t(s.frames));
  w.u32(std::uint32_t(s.window_size));
  w.u32(std::uint32_t(s.hop));
  w.f64(s.sample_rate);
  w.f64(s.cutoff_tag);
  for (double v : s.magnitudes) w.f32(float(v));
  return w.bytes();
}

inline dsp::Spectrogram decode_spectrogram(std::vector<unsigned char> bytes, const std::string& source = "spectrogram") {
  ByteReader r(std::move(bytes), source);
  r.expect_magic("EDSP");
  r.expect_version(kSpectrogramVersion);
  dsp::Spectrogram s;
  s.channels = int(r.u32());
  s.bins = int(r.u32());
  s.frames = int(r.u32());
  s.window_size = int(r.u32());
  s.hop = int(r.u32());
  s.sample_rate = r.f64();
  s.cutoff_tag = r.f64();
  s.magnitudes.resize(std::size_t(s.channels) * std::size_t(s.bins) * std::size_t(s.frames));
  for (auto& v : s.magnitudes) v = r.f32();
  r.expect_end();
  return s;
}

/// Rounds every magnitude to the stored f32 precision.
inline dsp::Spectrogram quantized(dsp::Spectrogram s) {
  for (auto& v : s.magnitudes) v = double(float(v));
  return s;
}

// Depth sidecar: "EDDM", version, u32 height, u32 width, f64 max_depth, then
// f32 values row-major.

inline std::vector<unsigned char> encode_depth(const acoustics::DepthMap& d) {
  ByteWriter w;
  w.magic("EDDM");
  w.u32(kDepthVersion);
  w.u32(std::uint32_t(d.height));
  w.u32(std::uint32_t(d.width));
  w.f64(d.max_depth);
  for (double v : d.values) w.f32(float(v));
  return w.bytes();
}

inline acoustics::DepthMap decode_depth(std::vector<unsigned char> bytes, const std::string& source = "depth") {
  ByteReader r(std::move(bytes), source);
  r.expect_magic("EDDM");
  r.expect_version(kDepthVersion);
  acoustics::DepthMap d;
  d.height = int(r.u32());
  d.width = int(r.u32());
  d.max_depth = r.f64();
  d.values.resize(std::size_t(d.height) * std::size_t(d.width));
  for (auto& v : d.values) v = r.f32();
  r.expect_end();
  return d;
}

inline acoustics::DepthMap quantized(acoustics::DepthMap d) {
  for (auto& v : d.values) v = double(float(v));
  return d;
}

/// Plain-text P2 graymap; gray level = round(depth / max_depth * 65535).
inline std::string depth_to_pgm(const acoustics::DepthMap& d) {
  constexpr int kMaxGray = 65535;
  std::ostringstream os;
  os << "P2\n# depth meters = gray / " << kMaxGray << " * " << d.max_depth << "\n"
     << d.width << " " << d.height << "\n"
     << kMaxGray << "\n";
  for (int i = 0; i < d.height; ++i) {
    for (int j = 0; j < d.width; ++j) {
      const double scaled = std::clamp(d.at(i, j) / d.max_depth, 0.0, 1.0) * kMaxGray;
      os << (j ? " " : "") << std::lround(scaled);
    }
    os << "\n";
  }
  return os.str();
}

// Checkpoints: "EDCK", version, u64 config hash, u32 config-json length,
// config JSON bytes, u32 tensor count, per tensor u32 rank and u32 dims, then
// all parameters as f32 in declaration order, then the input normalization:
// u64 mean length (0 or C*F*T), f32 mean values, f64 scale.

inline std::vector<unsigned char> encode_checkpoint(const nn::EchoNet<float>& net) {
  const std::string config = to_json(net.config()).dump();
  ByteWriter w;
  w.magic("EDCK");
  w.u32(kCheckpointVersion);
  w.u64(net.config().hash());
  w.u32(std::uint32_t(config.size()));
  w.raw(config);
  w.u32(std::uint32_t(net.parameters().size()));
  for (const auto& p : net.parameters()) {
    w.u32(std::uint32_t(p.rank()));
    for (int d : p.shape()) w.u32(std::uint32_t(d));
  }
  for (const auto& p : net.parameters()) {
    for (float v : p.data()) w.f32(v);
  }
  const auto& norm = net.normalization();
  w.u64(norm.mean.size());
  for (double v : norm.mean) w.f32(float(v));
  w.f64(norm.scale);
  return w.bytes();
}

inline nn::EchoNet<float> decode_checkpoint(std::vector<unsigned char> bytes, const std::string& source = "checkpoint") {
  ByteReader r(std::move(bytes), source);
  r.expect_magic("EDCK");
  r.expect_version(kCheckpointVersion);
  const std::uint64_t hash = r.u64();
  const std::string config_text = r.raw(r.u32());
  const nn::NetworkConfig config = network_from(json::parse(config_text));
  if (config.hash() != hash) throw FormatError(source + ": config hash mismatch");
  const auto expected = config.parameter_shapes();
  const std::uint32_t count = r.u32();
  if (count != expected.size()) throw FormatError(source + ": tensor count does not match config");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t rank = r.u32();
    nn::Shape shape(rank);
    for (auto& d : shape) d = int(r.u32());
    if (shape != expected[i]) throw FormatError(source + ": tensor shape does not match config");
  }
  std::vector<nn::Tensor<float>> params;
  for (const auto& shape : expected) {
    std::vector<float> v(nn::element_count(shape));
    for (auto& x : v) x = r.f32();
    params.push_back(nn::Tensor<float>::from(shape, std::move(v), true));
  }
  nn::InputNormalization norm;
  const std::uint64_t mean_count = r.u64();
  const std::uint64_t input_count = std::uint64_t(config.input_channels) * config.input_bins * config.input_frames;
  if (mean_count != 0 && mean_count != input_count) throw FormatError(source + ": normalization size mismatch");
  norm.mean.resize(mean_count);
  for (auto& x : norm.mean) x = double(r.f32());
  norm.scale = r.f64();
  r.expect_end();
  nn::EchoNet<float> net(config, std::move(params));
  try {
    net.set_normalization(std::move(norm));
  } catch (const InvalidArgument& e) {
    throw FormatError(source + ": " + e.what());
  }
  return net;
}

inline void save_checkpoint(const fs::path& path, const nn::EchoNet<float>& net) {
  write_file(path, encode_checkpoint(net));
}

inline nn::EchoNet<float> load_checkpoint(const fs::path& path) {
  return decode_checkpoint(read_file(path), path.string());
}

}  // namespace echodepth::persistence
