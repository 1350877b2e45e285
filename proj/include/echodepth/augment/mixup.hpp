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
#include <map>
#include <optional>
#include <random>
#include <string>

#include "echodepth/acoustics/types.hpp"
#include "echodepth/dsp/stft.hpp"

namespace echodepth::augment {

using acoustics::DepthMap;
using dsp::Spectrogram;

/// Provenance of a mixed sample.
struct MixRecord {
  double auxiliary_cutoff = 0.0;
  double alpha = 1.0;
};

/// Features and ground truth observed at one pose of one scene.
struct EchoSample {
  Spectrogram features;
  DepthMap depth;
  std::string scene_id;
  double cutoff_tag = 0.0;
  std::optional<MixRecord> mix;
};

struct MixPolicy {
  double ultrasonic_cutoff = 20000.0;
  double auxiliary_cutoff = 19500.0;
  double max_band_gap = 1000.0;

  void validate() const {
    require(auxiliary_cutoff < ultrasonic_cutoff, "auxiliary cutoff must lie below the ultrasonic cutoff");
    require(ultrasonic_cutoff - auxiliary_cutoff <= max_band_gap, "cutoff pair exceeds the maximum band gap");
  }
};

/// Ultrasonic cutoff -> auxiliary cutoff used in the three-way comparison.
using CutoffTable = std::map<double, double>;

inline const CutoffTable& default_cutoff_pairs() {
  static const CutoffTable table{{20000.0, 19500.0}, {21000.0, 20000.0}, {22000.0, 21000.0}};
  return table;
}

inline double pair_cutoffs(double ultrasonic, const CutoffTable& table = default_cutoff_pairs(),
                           double max_band_gap = 1000.0) {
  const auto it = table.find(ultrasonic);
  if (it == table.end()) {
    throw InvalidArgument("no auxiliary cutoff paired with " + std::to_string(ultrasonic) + " Hz");
  }
  MixPolicy{ultrasonic, it->second, max_band_gap}.validate();
  return it->second;
}

inline MixPolicy policy_for(double ultrasonic, const CutoffTable& table = default_cutoff_pairs()) {
  return MixPolicy{ultrasonic, pair_cutoffs(ultrasonic, table), 1000.0};
}

/// Mixing ratio alpha ~ U[0, 1).
inline double sample_alpha(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// X_a = alpha X_u + (1 - alpha) X_l. Both samples come from the same pose, so
/// the ground truth Y_a = Y_u = Y_l is passed through untouched.
inline EchoSample mix(const EchoSample& ultrasonic, const EchoSample& auxiliary, double alpha,
                      const MixPolicy& policy) {
  policy.validate();
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  if (ultrasonic.scene_id != auxiliary.scene_id) {
    throw InvalidArgument("cannot mix samples from different scenes: " + ultrasonic.scene_id + " vs " +
                          auxiliary.scene_id);
  }
  if (!ultrasonic.features.same_shape(auxiliary.features)) throw InvalidArgument("feature shapes differ");
  if (ultrasonic.cutoff_tag - auxiliary.cutoff_tag > policy.max_band_gap) {
    throw InvalidArgument("band gap between mixed samples exceeds policy");
  }

  EchoSample out;
  out.scene_id = ultrasonic.scene_id;
  out.depth = ultrasonic.depth;
  out.cutoff_tag = ultrasonic.cutoff_tag;
  out.mix = MixRecord{auxiliary.cutoff_tag, alpha};
  out.features = ultrasonic.features;
  const auto& xu = ultrasonic.features.magnitudes;
  const auto& xl = auxiliary.features.magnitudes;
  for (std::size_t i = 0; i < xu.size(); ++i) out.features.magnitudes[i] = alpha * xu[i] + (1.0 - alpha) * xl[i];
  return out;
}

}  // namespace echodepth::augment
