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

#include <cstdint>
#include <span>
#include <vector>

#include "echodepth/augment/mixup.hpp"
#include "echodepth/nn/network.hpp"

namespace echodepth::training {

using augment::EchoSample;
using nn::Tensor;

/// Weight of the augmented-echo branch: 1 - step / total_steps.
inline double lambda_at(std::int64_t step, std::int64_t total_steps) {
  require(total_steps >= 1, "schedule needs at least one step");
  if (step < 0 || step > total_steps) throw InvalidArgument("schedule step out of range");
  return 1.0 - double(step) / double(total_steps);
}

/// Stacks sample features into an N x C x F x T tensor.
template <typename T>
Tensor<T> features_tensor(std::span<const EchoSample* const> samples) {
  require(!samples.empty(), "empty batch");
  const auto& f0 = samples.front()->features;
  std::vector<T> v;
  v.reserve(samples.size() * f0.size());
  for (const EchoSample* s : samples) {
    require(s->features.same_shape(f0), "batch feature shapes differ");
    for (double x : s->features.magnitudes) v.push_back(T(x));
  }
  return Tensor<T>::from({int(samples.size()), f0.channels, f0.bins, f0.frames}, std::move(v));
}

/// Stacks ground-truth depth maps into an N x 1 x H x W tensor.
template <typename T>
Tensor<T> depth_tensor(std::span<const EchoSample* const> samples) {
  require(!samples.empty(), "empty batch");
  const auto& d0 = samples.front()->depth;
  std::vector<T> v;
  v.reserve(samples.size() * d0.values.size());
  for (const EchoSample* s : samples) {
    require(s->depth.height == d0.height && s->depth.width == d0.width, "batch depth shapes differ");
    for (double x : s->depth.values) v.push_back(T(x));
  }
  return Tensor<T>::from({int(samples.size()), 1, d0.height, d0.width}, std::move(v));
}

/// RMSE between predicted maps and ground truth, averaged over the batch.
template <typename T>
Tensor<T> rmse_loss(const Tensor<T>& predicted, const Tensor<T>& truth) {
  return nn::rmse(predicted, truth);
}

template <typename T>
Tensor<T> rmse_loss(const Tensor<T>& predicted, const acoustics::DepthMap& truth) {
  std::vector<T> v(truth.values.begin(), truth.values.end());
  return nn::rmse(predicted, Tensor<T>::from({1, 1, truth.height, truth.width}, std::move(v)));
}

template <typename T>
struct DualLoss {
  Tensor<T> total;
  T augmented = T(0);
  T ultrasonic = T(0);
};

/// lambda L_a(X_a, Y_a) + (1 - lambda) L_u(X_u, Y_a) from two forward passes
/// through the same network.
template <typename T>
DualLoss<T> total_loss(const nn::EchoNet<T>& net, const Tensor<T>& ultrasonic_features,
                       const Tensor<T>& augmented_features, const Tensor<T>& truth, double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  const Tensor<T> la = rmse_loss(net.forward(augmented_features), truth);
  const Tensor<T> lu = rmse_loss(net.forward(ultrasonic_features), truth);
  return {nn::add(nn::scale(la, T(lambda)), nn::scale(lu, T(1.0 - lambda))), la.item(), lu.item()};
}

template <typename T>
DualLoss<T> total_loss(const nn::EchoNet<T>& net, const EchoSample& ultrasonic, const EchoSample& augmented,
                       double lambda) {
  if (ultrasonic.scene_id != augmented.scene_id) throw InvalidArgument("branches must share a scene");
  const EchoSample* u[] = {&ultrasonic};
  const EchoSample* a[] = {&augmented};
  return total_loss(net, features_tensor<T>(u), features_tensor<T>(a), depth_tensor<T>(a), lambda);
}

}  // namespace echodepth::training
