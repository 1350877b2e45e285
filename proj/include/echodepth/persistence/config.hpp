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

#include <string>
#include <vector>

#include "json.hpp"

#include "echodepth/acoustics/scene_sampler.hpp"
#include "echodepth/dsp/chirp.hpp"
#include "echodepth/nn/network.hpp"
#include "echodepth/training/trainer.hpp"

namespace echodepth::persistence {

using json = nlohmann::ordered_json;

inline json to_json(const acoustics::Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline acoustics::Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// Scene files.

inline json to_json(const acoustics::RoomScene& s) {
  json receivers = json::array();
  for (const auto& r : s.receiver_positions) receivers.push_back(to_json(r));
  return {{"dimensions", to_json(s.dimensions)},
          {"source_position", to_json(s.source_position)},
          {"receiver_positions", receivers},
          {"receiver_orientation", to_json(s.receiver_orientation)},
          {"absorption", s.absorption},
          {"speed_of_sound", s.speed_of_sound},
          {"max_reflection_order", s.max_reflection_order}};
}

inline acoustics::RoomScene scene_from(const json& j) {
  acoustics::RoomScene s;
  s.dimensions = vec3_from(j.at("dimensions"));
  s.source_position = vec3_from(j.at("source_position"));
  s.receiver_positions.clear();
  for (const auto& r : j.at("receiver_positions")) s.receiver_positions.push_back(vec3_from(r));
  s.receiver_orientation = vec3_from(j.at("receiver_orientation"));
  s.absorption = j.at("absorption").get<std::array<double, 6>>();
  s.speed_of_sound = j.value("speed_of_sound", acoustics::kDefaultSpeedOfSound);
  s.max_reflection_order = j.value("max_reflection_order", 0);
  s.validate();
  return s;
}

inline json to_json(const acoustics::SceneRanges& r) {
  return {{"min_length", r.min_length},
          {"max_length", r.max_length},
          {"min_aspect", r.min_aspect},
          {"max_aspect", r.max_aspect},
          {"min_height", r.min_height},
          {"max_height", r.max_height},
          {"min_head_x", r.min_head_x},
          {"max_head_x", r.max_head_x},
          {"min_head_y", r.min_head_y},
          {"max_head_y", r.max_head_y},
          {"min_head_height", r.min_head_height},
          {"max_head_height", r.max_head_height},
          {"yaw_range_degrees", r.yaw_range_degrees},
          {"receiver_spacing", r.receiver_spacing},
          {"source_offset", r.source_offset},
          {"min_absorption", r.min_absorption},
          {"max_absorption", r.max_absorption},
          {"max_reflection_order", r.max_reflection_order},
          {"speed_of_sound", r.speed_of_sound}};
}

inline acoustics::SceneRanges ranges_from(const json& j) {
  acoustics::SceneRanges r;
  r.min_length = j.value("min_length", r.min_length);
  r.max_length = j.value("max_length", r.max_length);
  r.min_aspect = j.value("min_aspect", r.min_aspect);
  r.max_aspect = j.value("max_aspect", r.max_aspect);
  r.min_height = j.value("min_height", r.min_height);
  r.max_height = j.value("max_height", r.max_height);
  r.min_head_x = j.value("min_head_x", r.min_head_x);
  r.max_head_x = j.value("max_head_x", r.max_head_x);
  r.min_head_y = j.value("min_head_y", r.min_head_y);
  r.max_head_y = j.value("max_head_y", r.max_head_y);
  r.min_head_height = j.value("min_head_height", r.min_head_height);
  r.max_head_height = j.value("max_head_height", r.max_head_height);
  r.yaw_range_degrees = j.value("yaw_range_degrees", r.yaw_range_degrees);
  r.receiver_spacing = j.value("receiver_spacing", r.receiver_spacing);
  r.source_offset = j.value("source_offset", r.source_offset);
  r.min_absorption = j.value("min_absorption", r.min_absorption);
  r.max_absorption = j.value("max_absorption", r.max_absorption);
  r.max_reflection_order = j.value("max_reflection_order", r.max_reflection_order);
  r.speed_of_sound = j.value("speed_of_sound", r.speed_of_sound);
  r.validate();
  return r;
}

inline json to_json(const dsp::ChirpSpec& c) {
  return {{"f_start", c.f_start},
          {"f_end", c.f_end},
          {"duration", c.duration},
          {"sample_rate", c.sample_rate},
          {"amplitude", c.amplitude}};
}

inline dsp::ChirpSpec chirp_from(const json& j) {
  dsp::ChirpSpec c;
  c.f_start = j.value("f_start", c.f_start);
  c.f_end = j.value("f_end", c.f_end);
  c.duration = j.value("duration", c.duration);
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  c.amplitude = j.value("amplitude", c.amplitude);
  c.validate();
  return c;
}

// Network configuration.

inline json to_json(const nn::LayerSpec& l) {
  return json::array({l.channels, l.kernel, l.stride, l.padding});
}

inline nn::LayerSpec layer_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw FormatError("layer spec must be [channels, kernel, stride, padding]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

inline json to_json(const nn::NetworkConfig& c) {
  json conv = json::array(), deconv = json::array();
  for (const auto& l : c.conv) conv.push_back(to_json(l));
  for (const auto& l : c.deconv) deconv.push_back(to_json(l));
  return {{"input_channels", c.input_channels},
          {"input_bins", c.input_bins},
          {"input_frames", c.input_frames},
          {"conv", conv},
          {"deconv", deconv},
          {"output_height", c.output_height},
          {"output_width", c.output_width},
          {"max_depth", c.max_depth}};
}

inline nn::NetworkConfig network_from(const json& j, nn::NetworkConfig c = {}) {
  c.input_channels = j.value("input_channels", c.input_channels);
  c.input_bins = j.value("input_bins", c.input_bins);
  c.input_frames = j.value("input_frames", c.input_frames);
  if (j.contains("conv")) {
    if (j["conv"].size() != 3) throw FormatError("network needs exactly three conv layers");
    for (std::size_t i = 0; i < 3; ++i) c.conv[i] = layer_from(j["conv"][i]);
  }
  if (j.contains("deconv")) {
    if (j["deconv"].size() != 7) throw FormatError("network needs exactly seven deconv layers");
    for (std::size_t i = 0; i < 7; ++i) c.deconv[i] = layer_from(j["deconv"][i]);
  }
  c.output_height = j.value("output_height", c.output_height);
  c.output_width = j.value("output_width", c.output_width);
  c.max_depth = j.value("max_depth", c.max_depth);
  return c;
}

inline json to_json(const training::TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"seeds", t.seeds},
          {"mode", training::to_string(t.mode)},
          {"normalize_inputs", t.normalize_inputs}};
}

inline training::TrainConfig train_config_from(const json& j) {
  training::TrainConfig t;
  t.epochs = j.value("epochs", t.epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  if (j.contains("seeds")) t.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("mode")) t.mode = training::parse_mode(j["mode"].get<std::string>());
  t.normalize_inputs = j.value("normalize_inputs", t.normalize_inputs);
  t.validate();
  return t;
}

}  // namespace echodepth::persistence
