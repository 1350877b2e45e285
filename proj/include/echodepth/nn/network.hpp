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
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "echodepth/hash.hpp"
#include "echodepth/nn/conv.hpp"

namespace echodepth::nn {

struct LayerSpec {
  int channels = 1;  // output channels
  int kernel = 4;
  int stride = 2;
  int padding = 1;
};

/// Encoder-decoder: input standardization, three strided convolutions, a global average pool down to
/// 1 x 1, then seven transposed convolutions up to the depth map. Hidden
/// layers use ReLU; the output is max_depth * logistic.
struct NetworkConfig {
  int input_channels = 2;
  int input_bins = 257;
  int input_frames = 39;
  std::array<LayerSpec, 3> conv{{{32, 4, 2, 1}, {64, 4, 2, 1}, {128, 4, 2, 1}}};
  std::array<LayerSpec, 7> deconv{
      {{128, 4, 2, 1}, {64, 4, 2, 1}, {64, 4, 2, 1}, {32, 4, 2, 1}, {32, 4, 2, 1}, {16, 3, 1, 1}, {1, 3, 1, 1}}};
  int output_height = 32;
  int output_width = 32;
  double max_depth = 10.0;

  /// Minimal configuration for gradient checks: 2 x 8 x 8 input, 4 x 4 output.
  static NetworkConfig tiny() {
    NetworkConfig c;
    c.input_bins = 8;
    c.input_frames = 8;
    c.conv = {{{3, 3, 2, 1}, {4, 3, 2, 1}, {4, 3, 1, 1}}};
    c.deconv = {{{4, 4, 2, 1}, {3, 4, 2, 1}, {3, 3, 1, 1}, {2, 3, 1, 1}, {2, 3, 1, 1}, {2, 3, 1, 1}, {1, 3, 1, 1}}};
    c.output_height = 4;
    c.output_width = 4;
    return c;
  }

  Shape input_shape(int batch = 1) const { return {batch, input_channels, input_bins, input_frames}; }
  Shape output_shape(int batch = 1) const { return {batch, 1, output_height, output_width}; }

  /// Checks that the layer arithmetic maps input_shape onto output_shape.
  void validate() const {
    require(input_channels >= 1 && input_bins >= 1 && input_frames >= 1, "input shape must be positive");
    require(max_depth > 0.0, "max_depth must be positive");
    int h = input_bins, w = input_frames;
    for (const auto& l : conv) {
      require(l.channels >= 1 && l.kernel >= 1 && l.stride >= 1 && l.padding >= 0, "invalid conv layer spec");
      h = conv_output_size(h, l.kernel, l.stride, l.padding);
      w = conv_output_size(w, l.kernel, l.stride, l.padding);
    }
    h = w = 1;
    for (const auto& l : deconv) {
      require(l.channels >= 1 && l.kernel >= 1 && l.stride >= 1 && l.padding >= 0, "invalid deconv layer spec");
      h = deconv_output_size(h, l.kernel, l.stride, l.padding);
      w = deconv_output_size(w, l.kernel, l.stride, l.padding);
    }
    require(deconv.back().channels == 1, "last deconvolution must emit one channel");
    if (h != output_height || w != output_width) {
      throw InvalidArgument("decoder emits " + std::to_string(h) + "x" + std::to_string(w) + ", config expects " +
                            std::to_string(output_height) + "x" + std::to_string(output_width));
    }
  }

  std::uint64_t hash() const {
    ContentHash hs;
    hs.value(input_channels).value(input_bins).value(input_frames);
    for (const auto& l : conv) hs.value(l.channels).value(l.kernel).value(l.stride).value(l.padding);
    for (const auto& l : deconv) hs.value(l.channels).value(l.kernel).value(l.stride).value(l.padding);
    hs.value(output_height).value(output_width).value(max_depth);
    return hs.digest();
  }

  /// Parameter shapes in declaration order: weight then bias per layer.
  std::vector<Shape> parameter_shapes() const {
    std::vector<Shape> shapes;
    int in = input_channels;
    for (const auto& l : conv) {
      shapes.push_back({l.channels, in, l.kernel, l.kernel});
      shapes.push_back({l.channels});
      in = l.channels;
    }
    for (const auto& l : deconv) {
      shapes.push_back({in, l.channels, l.kernel, l.kernel});
      shapes.push_back({l.channels});
      in = l.channels;
    }
    return shapes;
  }
};

/// Fixed input transform (x - mean) / scale. The mean holds one value per
/// input element (C x F x T); an empty mean means identity.
struct InputNormalization {
  std::vector<double> mean;
  double scale = 1.0;

  bool is_identity() const { return mean.empty() && scale == 1.0; }

  void validate(const NetworkConfig& config) const {
    require(std::isfinite(scale) && scale > 0.0, "normalization scale must be positive");
    const std::size_t n = std::size_t(config.input_channels) * config.input_bins * config.input_frames;
    require(mean.empty() || mean.size() == n, "normalization mean does not match the input shape");
  }
};

template <typename T>
class EchoNet {
 public:
  /// Uniform(-1/sqrt(fan), 1/sqrt(fan)) initialization with fan = dim(1) k^2.
  EchoNet(NetworkConfig config, std::uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    std::mt19937_64 rng(seed);
    for (const auto& shape : config_.parameter_shapes()) params_.push_back(Tensor<T>::zeros(shape, true));
    for (std::size_t layer = 0; layer < params_.size() / 2; ++layer) {
      const Shape& ws = params_[2 * layer].shape();
      const double bound = 1.0 / std::sqrt(double(ws[1]) * ws[2] * ws[3]);
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& v : params_[2 * layer].data()) v = T(dist(rng));
      for (auto& v : params_[2 * layer + 1].data()) v = T(dist(rng));
    }
  }

  /// Wraps existing parameter tensors, e.g. loaded from a checkpoint.
  EchoNet(NetworkConfig config, std::vector<Tensor<T>> params) : config_(std::move(config)), params_(std::move(params)) {
    config_.validate();
    const auto shapes = config_.parameter_shapes();
    require(params_.size() == shapes.size(), "parameter count does not match network config");
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      require(params_[i].shape() == shapes[i], "parameter shape does not match network config");
    }
  }

  const NetworkConfig& config() const { return config_; }
  const std::vector<Tensor<T>>& parameters() const { return params_; }
  const InputNormalization& normalization() const { return normalization_; }

  void set_normalization(InputNormalization n) {
    n.validate(config_);
    normalization_ = std::move(n);
  }

  Tensor<T> forward(const Tensor<T>& input) const {
    if (input.rank() != 4 || input.dim(1) != config_.input_channels || input.dim(2) != config_.input_bins ||
        input.dim(3) != config_.input_frames) {
      throw InvalidArgument("network input " + shape_string(input.shape()) + " does not match config " +
                            shape_string(config_.input_shape(input.rank() == 4 ? input.dim(0) : 1)));
    }
    Tensor<T> x = input;
    if (!normalization_.is_identity()) {
      std::vector<T> offset(std::size_t(input.numel() / input.dim(0)), T(0));
      std::copy(normalization_.mean.begin(), normalization_.mean.end(), offset.begin());
      x = standardize(x, offset, T(1.0 / normalization_.scale));
    }
    std::size_t p = 0;
    for (const auto& l : config_.conv) {
      x = relu(conv2d(x, params_[p], params_[p + 1], l.stride, l.padding));
      p += 2;
    }
    x = global_average_pool(x);
    for (std::size_t i = 0; i < config_.deconv.size(); ++i) {
      const auto& l = config_.deconv[i];
      x = deconv2d(x, params_[p], params_[p + 1], l.stride, l.padding);
      p += 2;
      if (i + 1 < config_.deconv.size()) x = relu(x);
    }
    return scaled_sigmoid(x, T(config_.max_depth));
  }

  template <typename U>
  EchoNet<U> cast() const {
    std::vector<Tensor<U>> converted;
    for (const auto& p : params_) {
      converted.push_back(Tensor<U>::from(p.shape(), std::vector<U>(p.data().begin(), p.data().end()), true));
    }
    EchoNet<U> out(config_, std::move(converted));
    out.set_normalization(normalization_);
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.numel();
    return n;
  }

 private:
  NetworkConfig config_;
  std::vector<Tensor<T>> params_;
  InputNormalization normalization_;
};

}  // namespace echodepth::nn
