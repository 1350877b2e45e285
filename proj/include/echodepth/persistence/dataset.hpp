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
#include <cstdint>
#include <filesystem>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "echodepth/acoustics/echo.hpp"
#include "echodepth/acoustics/render_depth.hpp"
#include "echodepth/acoustics/scene_sampler.hpp"
#include "echodepth/augment/mixup.hpp"
#include "echodepth/dsp/chirp.hpp"
#include "echodepth/dsp/features.hpp"
#include "echodepth/persistence/config.hpp"
#include "echodepth/persistence/formats.hpp"
#include "echodepth/training/trainer.hpp"

namespace echodepth::persistence {

inline constexpr int kManifestVersion = 1;
inline const std::vector<double>& default_cutoffs() {
  static const std::vector<double> c{1.0, 15000.0, 17500.0, 19000.0, 19500.0, 20000.0, 21000.0, 22000.0};
  return c;
}

/// Everything that determines a synthesized dataset.
struct GenerationConfig {
  std::string dataset_id = "desk";
  int train_scenes = 64;
  int test_scenes = 16;
  std::uint64_t seed = 2024;
  acoustics::SceneRanges ranges;
  std::vector<double> cutoffs = default_cutoffs();
  dsp::ChirpSpec chirp;
  std::size_t filter_taps = dsp::kDefaultHighpassTaps;
  int window_size = dsp::kDefaultWindow;
  int hop = dsp::kDefaultHop;
  double recording_seconds = acoustics::kDefaultRecordingSeconds;
  int depth_height = 32;
  int depth_width = 32;
  double fov_degrees = 90.0;
  double max_depth = acoustics::kDefaultMaxDepth;

  void validate() const {
    require(!dataset_id.empty(), "dataset_id must not be empty");
    require(train_scenes >= 0 && test_scenes >= 0 && train_scenes + test_scenes > 0, "scene count must be positive");
    require(!cutoffs.empty(), "at least one cutoff is required");
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
      require(cutoffs[i] >= 0.0 && cutoffs[i] < 0.5 * chirp.sample_rate, "cutoff outside [0, Nyquist)");
      require(i == 0 || cutoffs[i] > cutoffs[i - 1], "cutoffs must be strictly increasing");
    }
    chirp.validate();
    ranges.validate();
    require(window_size >= 2 && hop >= 1, "invalid STFT settings");
    require(recording_seconds >= chirp.duration, "recording must cover the chirp");
    require(depth_height >= 1 && depth_width >= 1 && fov_degrees > 0.0 && fov_degrees < 180.0 && max_depth > 0.0,
            "invalid depth rendering settings");
  }

  /// Hash of the signal-processing chain shared by every feature file.
  std::uint64_t dsp_hash() const {
    ContentHash h;
    h.text(to_json(chirp).dump()).value(std::uint64_t(filter_taps)).value(window_size).value(hop);
    h.value(recording_seconds);
    return h.digest();
  }
};

inline json to_json(const GenerationConfig& g) {
  return {{"dataset_id", g.dataset_id},
          {"train_scenes", g.train_scenes},
          {"test_scenes", g.test_scenes},
          {"seed", g.seed},
          {"ranges", to_json(g.ranges)},
          {"cutoffs", g.cutoffs},
          {"chirp", to_json(g.chirp)},
          {"filter_taps", g.filter_taps},
          {"window_size", g.window_size},
          {"hop", g.hop},
          {"recording_seconds", g.recording_seconds},
          {"depth_height", g.depth_height},
          {"depth_width", g.depth_width},
          {"fov_degrees", g.fov_degrees},
          {"max_depth", g.max_depth}};
}

inline GenerationConfig generation_from(const json& j) {
  GenerationConfig g;
  g.dataset_id = j.value("dataset_id", g.dataset_id);
  g.train_scenes = j.value("train_scenes", g.train_scenes);
  g.test_scenes = j.value("test_scenes", g.test_scenes);
  g.seed = j.value("seed", g.seed);
  if (j.contains("ranges")) g.ranges = ranges_from(j["ranges"]);
  if (j.contains("cutoffs")) g.cutoffs = j["cutoffs"].get<std::vector<double>>();
  if (j.contains("chirp")) g.chirp = chirp_from(j["chirp"]);
  g.filter_taps = j.value("filter_taps", g.filter_taps);
  g.window_size = j.value("window_size", g.window_size);
  g.hop = j.value("hop", g.hop);
  g.recording_seconds = j.value("recording_seconds", g.recording_seconds);
  g.depth_height = j.value("depth_height", g.depth_height);
  g.depth_width = j.value("depth_width", g.depth_width);
  g.fov_degrees = j.value("fov_degrees", g.fov_degrees);
  g.max_depth = j.value("max_depth", g.max_depth);
  g.validate();
  return g;
}

struct FeatureEntry {
  double cutoff = 0.0;
  std::string file;  // relative to the dataset root
  std::string hash;
};

struct SceneEntry {
  std::string scene_id;
  std::string split;  // "train" or "test"
  std::uint64_t seed = 0;
  std::string scene_file;
  std::string scene_hash;
  std::string depth_file;
  std::string depth_hash;
  std::vector<FeatureEntry> features;
};

struct DatasetManifest {
  fs::path root;
  std::string dataset_id;
  std::string dsp_hash;
  GenerationConfig generation;
  std::vector<SceneEntry> scenes;

  const SceneEntry& scene(const std::string& scene_id) const {
    for (const auto& s : scenes) {
      if (s.scene_id == scene_id) return s;
    }
    throw InvalidArgument("no scene '" + scene_id + "' in dataset " + dataset_id);
  }

  std::vector<std::string> split_ids(const std::string& split) const {
    std::vector<std::string> ids;
    for (const auto& s : scenes) {
      if (s.split == split) ids.push_back(s.scene_id);
    }
    return ids;
  }

  /// Unique scene ids, known split tags and disjoint splits.
  void validate() const {
    std::set<std::string> train, test;
    for (const auto& s : scenes) {
      if (s.split != "train" && s.split != "test") throw FormatError("scene " + s.scene_id + " has unknown split");
      auto& bucket = s.split == "train" ? train : test;
      const auto& other = s.split == "train" ? test : train;
      if (bucket.count(s.scene_id) || other.count(s.scene_id)) {
        throw FormatError("scene id " + s.scene_id + " appears more than once");
      }
      bucket.insert(s.scene_id);
    }
  }
};

inline json to_json(const DatasetManifest& m) {
  json scenes = json::array();
  for (const auto& s : m.scenes) {
    json features = json::array();
    for (const auto& f : s.features) features.push_back({{"cutoff", f.cutoff}, {"file", f.file}, {"hash", f.hash}});
    scenes.push_back({{"scene_id", s.scene_id},
                      {"split", s.split},
                      {"seed", s.seed},
                      {"scene_file", s.scene_file},
                      {"scene_hash", s.scene_hash},
                      {"depth_file", s.depth_file},
                      {"depth_hash", s.depth_hash},
                      {"features", features}});
  }
  return {{"format", "echodepth-manifest"},
          {"version", kManifestVersion},
          {"dataset_id", m.dataset_id},
          {"dsp_hash", m.dsp_hash},
          {"generator", {{"name", "echodepth"}, {"version", "1.0.0"}}},
          {"generation", to_json(m.generation)},
          {"scenes", scenes}};
}

inline DatasetManifest load_manifest(const fs::path& root) {
  const fs::path path = root / "manifest.json";
  json j;
  try {
    const auto bytes = read_file(path);
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (j.value("format", std::string()) != "echodepth-manifest") throw FormatError(path.string() + ": not a manifest");
  if (j.value("version", -1) != kManifestVersion) throw FormatError(path.string() + ": unsupported manifest version");
  DatasetManifest m;
  m.root = root;
  try {
    m.dataset_id = j.at("dataset_id").get<std::string>();
    m.dsp_hash = j.at("dsp_hash").get<std::string>();
    m.generation = generation_from(j.at("generation"));
    for (const auto& s : j.at("scenes")) {
      SceneEntry e;
      e.scene_id = s.at("scene_id").get<std::string>();
      e.split = s.at("split").get<std::string>();
      e.seed = s.at("seed").get<std::uint64_t>();
      e.scene_file = s.at("scene_file").get<std::string>();
      e.scene_hash = s.at("scene_hash").get<std::string>();
      e.depth_file = s.at("depth_file").get<std::string>();
      e.depth_hash = s.at("depth_hash").get<std::string>();
      for (const auto& f : s.at("features")) {
        e.features.push_back({f.at("cutoff").get<double>(), f.at("file").get<std::string>(),
                              f.at("hash").get<std::string>()});
      }
      m.scenes.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  m.validate();
  return m;
}

namespace detail {

inline std::vector<unsigned char> read_verified(const DatasetManifest& m, const std::string& file,
                                                const std::string& hash) {
  const fs::path path = m.root / file;
  auto bytes = read_file(path);
  if (ContentHash().bytes(std::as_bytes(std::span(bytes))).hex() != hash) {
    throw FormatError(path.string() + ": content hash mismatch");
  }
  return bytes;
}

/// Writes `bytes` at a content-addressed path; an existing file must be identical.
inline void write_artifact(const fs::path& path, const std::vector<unsigned char>& bytes) {
  if (fs::exists(path)) {
    if (read_file(path) != bytes) throw FormatError(path.string() + " exists with different content");
    return;
  }
  write_file(path, bytes);
}

inline std::vector<unsigned char> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

inline std::string hash_of(const std::vector<unsigned char>& bytes) {
  return ContentHash().bytes(std::as_bytes(std::span(bytes))).hex();
}

}  // namespace detail

/// Checks every referenced file against its recorded hash.
inline void verify_manifest(const DatasetManifest& m) {
  for (const auto& s : m.scenes) {
    detail::read_verified(m, s.scene_file, s.scene_hash);
    detail::read_verified(m, s.depth_file, s.depth_hash);
    for (const auto& f : s.features) detail::read_verified(m, f.file, f.hash);
  }
}

inline acoustics::RoomScene load_scene(const DatasetManifest& m, const std::string& scene_id) {
  const auto& s = m.scene(scene_id);
  const auto bytes = detail::read_verified(m, s.scene_file, s.scene_hash);
  return scene_from(json::parse(bytes.begin(), bytes.end()));
}

/// Features and depth of one (scene, cutoff) pair, hash-verified.
inline augment::EchoSample load_sample(const DatasetManifest& m, const std::string& scene_id, double cutoff) {
  const auto& s = m.scene(scene_id);
  const auto it = std::find_if(s.features.begin(), s.features.end(),
                               [cutoff](const FeatureEntry& f) { return f.cutoff == cutoff; });
  if (it == s.features.end()) {
    throw InvalidArgument("scene " + scene_id + " has no features for cutoff " + std::to_string(cutoff));
  }
  augment::EchoSample out;
  out.scene_id = scene_id;
  out.cutoff_tag = cutoff;
  out.features = decode_spectrogram(detail::read_verified(m, it->file, it->hash), it->file);
  out.depth = decode_depth(detail::read_verified(m, s.depth_file, s.depth_hash), s.depth_file);
  return out;
}

/// Samples, synthesizes and stores every scene and cutoff under `out_dir`.
/// Refuses to run over an existing manifest.
inline DatasetManifest build_dataset(const GenerationConfig& config, const fs::path& out_dir) {
  config.validate();
  if (fs::exists(out_dir / "manifest.json")) {
    throw InvalidArgument("refusing to overwrite dataset at " + out_dir.string());
  }
  const double fs_rate = config.chirp.sample_rate;
  const std::size_t length = acoustics::samples_for(config.recording_seconds, fs_rate);
  const auto chirp = dsp::pad_to(dsp::generate_chirp(config.chirp), length);
  std::vector<acoustics::Waveform> sources;
  for (double c : config.cutoffs) {
    sources.push_back(
        dsp::apply_filter(dsp::design_highpass({c, 0.5 * fs_rate}, fs_rate, config.filter_taps), chirp));
  }

  DatasetManifest m;
  m.root = out_dir;
  m.dataset_id = config.dataset_id;
  m.dsp_hash = ContentHash::to_hex(config.dsp_hash());
  m.generation = config;

  const int total = config.train_scenes + config.test_scenes;
  for (int i = 0; i < total; ++i) {
    SceneEntry e;
    char id[32];
    std::snprintf(id, sizeof id, "scene_%04d", i);
    e.scene_id = id;
    e.split = i < config.train_scenes ? "train" : "test";
    e.seed = training::derive_seed(config.seed, std::uint64_t(i));
    const auto scene = acoustics::sample_scene(config.ranges, e.seed);
    const std::string scene_text = to_json(scene).dump(2) + "\n";

    e.scene_file = "scenes/" + e.scene_id + ".json";
    const auto scene_bytes = detail::to_bytes(scene_text);
    e.scene_hash = detail::hash_of(scene_bytes);
    detail::write_artifact(out_dir / e.scene_file, scene_bytes);

    const auto depth = quantized(
        acoustics::render_depth(scene, config.depth_height, config.depth_width, config.fov_degrees, config.max_depth));
    ContentHash depth_key;
    depth_key.text(scene_text).value(config.depth_height).value(config.depth_width).value(config.fov_degrees);
    depth_key.value(config.max_depth);
    e.depth_file = "depths/" + depth_key.hex() + ".eddm";
    const auto depth_bytes = encode_depth(depth);
    e.depth_hash = detail::hash_of(depth_bytes);
    detail::write_artifact(out_dir / e.depth_file, depth_bytes);
    detail::write_artifact(out_dir / ("depths/" + depth_key.hex() + ".pgm"), detail::to_bytes(depth_to_pgm(depth)));

    const auto [left_rir, right_rir] = acoustics::simulate_binaural_rirs(scene, fs_rate, config.recording_seconds);
    for (std::size_t c = 0; c < config.cutoffs.size(); ++c) {
      const auto left = acoustics::convolve(left_rir, sources[c], length);
      const auto right = acoustics::convolve(right_rir, sources[c], length);
      const auto features = quantized(dsp::make_features(left, right, {config.cutoffs[c], 0.5 * fs_rate},
                                                         config.window_size, config.hop));
      ContentHash key;
      key.text(scene_text).value(config.dsp_hash()).value(config.cutoffs[c]);
      FeatureEntry f;
      f.cutoff = config.cutoffs[c];
      f.file = "features/" + key.hex() + ".edsp";
      const auto bytes = encode_spectrogram(features);
      f.hash = detail::hash_of(bytes);
      detail::write_artifact(out_dir / f.file, bytes);
      e.features.push_back(std::move(f));
    }
    m.scenes.push_back(std::move(e));
  }
  m.validate();
  write_file(out_dir / "manifest.json", to_json(m).dump(2) + "\n");
  return m;
}

/// One split at one cutoff, with an optional auxiliary cutoff loaded on first
/// use. Counts auxiliary loads so callers can assert none happened.
class ManifestDataset : public training::EchoDataset {
 public:
  ManifestDataset(const DatasetManifest& manifest, const std::string& split, double cutoff,
                  std::optional<double> auxiliary_cutoff = std::nullopt)
      : manifest_(manifest), ids_(manifest.split_ids(split)), auxiliary_cutoff_(auxiliary_cutoff) {
    if (ids_.empty()) throw InvalidArgument("split '" + split + "' is empty");
    for (const auto& id : ids_) ultrasonic_.push_back(load_sample(manifest_, id, cutoff));
  }

  std::size_t size() const override { return ids_.size(); }
  const augment::EchoSample& ultrasonic(std::size_t i) const override { return ultrasonic_.at(i); }

  const augment::EchoSample& auxiliary(std::size_t i) const override {
    if (!auxiliary_cutoff_) throw InvalidArgument("dataset was opened without an auxiliary cutoff");
    if (auxiliary_.empty()) {
      for (const auto& id : ids_) auxiliary_.push_back(load_sample(manifest_, id, *auxiliary_cutoff_));
    }
    ++auxiliary_reads_;
    return auxiliary_.at(i);
  }

  std::size_t auxiliary_reads() const { return auxiliary_reads_; }

 private:
  DatasetManifest manifest_;
  std::vector<std::string> ids_;
  std::optional<double> auxiliary_cutoff_;
  std::vector<augment::EchoSample> ultrasonic_;
  mutable std::vector<augment::EchoSample> auxiliary_;
  mutable std::size_t auxiliary_reads_ = 0;
};

}  // namespace echodepth::persistence
