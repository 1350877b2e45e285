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
#include <cstdint>
#include <vector>

#include "echodepth/nn/tensor.hpp"

namespace echodepth::nn {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over a fixed list of parameter tensors.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Tensor<T>> params, AdamOptions options = {}) : params_(std::move(params)), options_(options) {
    for (const auto& p : params_) {
      first_moment_.emplace_back(p.numel(), T(0));
      second_moment_.emplace_back(p.numel(), T(0));
    }
  }

  /// Applies one update from the parameters' accumulated gradients. A
  /// non-finite gradient aborts before any parameter is touched.
  void step() {
    for (const auto& p : params_) {
      if (!p.has_grad()) continue;
      for (T g : p.grad()) {
        if (!std::isfinite(g)) throw NumericalError("non-finite gradient in Adam step");
      }
    }
    ++step_count_;
    const T b1 = T(options_.beta1), b2 = T(options_.beta2);
    const T correction1 = T(1) - T(std::pow(options_.beta1, double(step_count_)));
    const T correction2 = T(1) - T(std::pow(options_.beta2, double(step_count_)));
    const T lr = T(options_.learning_rate), eps = T(options_.epsilon);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& p = params_[k];
      if (!p.has_grad()) continue;
      auto value = p.data();
      auto grad = p.grad();
      auto& m = first_moment_[k];
      auto& v = second_moment_[k];
      for (std::size_t i = 0; i < value.size(); ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * grad[i];
        v[i] = b2 * v[i] + (T(1) - b2) * grad[i] * grad[i];
        const T m_hat = m[i] / correction1;
        const T v_hat = v[i] / correction2;
        value[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
      }
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  std::int64_t step_count() const { return step_count_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Buffer<T>>& first_moment() const { return first_moment_; }
  const std::vector<Buffer<T>>& second_moment() const { return second_moment_; }

 private:
  std::vector<Tensor<T>> params_;
  AdamOptions options_;
  std::vector<Buffer<T>> first_moment_;
  std::vector<Buffer<T>> second_moment_;
  std::int64_t step_count_ = 0;
};

}  // namespace echodepth::nn
