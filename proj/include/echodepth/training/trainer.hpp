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
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "echodepth/nn/adam.hpp"
#include "echodepth/training/loss.hpp"

namespace echodepth::training {

enum class TrainMode { kUltrasonicOnly, kAugmentedOnly, kProposed };

inline std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kUltrasonicOnly: return "ultrasonic_only";
    case TrainMode::kAugmentedOnly: return "augmented_only";
    case TrainMode::kProposed: return "proposed";
  }
  return "unknown";
}

inline TrainMode parse_mode(const std::string& name) {
  if (name == "ultrasonic_only") return TrainMode::kUltrasonicOnly;
  if (name == "augmented_only") return TrainMode::kAugmentedOnly;
  if (name == "proposed") return TrainMode::kProposed;
  throw InvalidArgument("unknown training mode '" + name + "'");
}

struct TrainConfig {
  int epochs = 300;
  int batch_size = 8;
  double learning_rate = 1e-4;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  TrainMode mode = TrainMode::kProposed;
  /// Standardize inputs with statistics of the training ultrasonic features.
  bool normalize_inputs = true;

  void validate() const {
    require(epochs >= 1 && batch_size >= 1, "epochs and batch size must be positive");
    require(learning_rate > 0.0, "learning rate must be positive");
  }
};

/// Paired ultrasonic and auxiliary samples for the same poses. Subclasses may
/// load lazily; the trainer only touches auxiliary() when the mode mixes.
class EchoDataset {
 public:
  virtual ~EchoDataset() = default;
  virtual std::size_t size() const = 0;
  virtual const EchoSample& ultrasonic(std::size_t i) const = 0;
  virtual const EchoSample& auxiliary(std::size_t i) const = 0;
};

class InMemoryDataset : public EchoDataset {
 public:
  InMemoryDataset() = default;
  InMemoryDataset(std::vector<EchoSample> ultrasonic, std::vector<EchoSample> auxiliary)
      : ultrasonic_(std::move(ultrasonic)), auxiliary_(std::move(auxiliary)) {
    require(auxiliary_.empty() || auxiliary_.size() == ultrasonic_.size(), "auxiliary set must pair with every sample");
    for (std::size_t i = 0; i < auxiliary_.size(); ++i) {
      require(auxiliary_[i].scene_id == ultrasonic_[i].scene_id, "paired samples must share a scene");
    }
  }

  std::size_t size() const override { return ultrasonic_.size(); }
  const EchoSample& ultrasonic(std::size_t i) const override { return ultrasonic_.at(i); }
  const EchoSample& auxiliary(std::size_t i) const override {
    require(!auxiliary_.empty(), "dataset has no auxiliary samples");
    return auxiliary_.at(i);
  }

 private:
  std::vector<EchoSample> ultrasonic_;
  std::vector<EchoSample> auxiliary_;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;             // mean optimized objective over batches
  double ultrasonic_rmse = 0.0;  // mean ultrasonic-branch RMSE (NaN when not evaluated)
  double lambda = 0.0;           // weight at the epoch's last step
};

struct TrainResult {
  nn::EchoNet<float> net;
  std::vector<EpochRecord> trace;
  /// Mean ultrasonic RMSE over the training set after the last update.
  double final_ultrasonic_rmse = 0.0;
};

/// Columns: epoch,loss,ultrasonic_rmse,lambda; values use %.17g.
inline std::string trace_csv(const std::vector<EpochRecord>& trace) {
  std::string out = "epoch,loss,ultrasonic_rmse,lambda\n";
  char line[128];
  for (const auto& r : trace) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", r.epoch, r.loss, r.ultrasonic_rmse, r.lambda);
    out += line;
  }
  return out;
}

/// Independent generator streams derived from one run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct EvalRow {
  std::string scene_id;
  double rmse = 0.0;
};

struct EvalResult {
  std::vector<EvalRow> rows;
  double mean_rmse = 0.0;
};

/// Mean feature map over the ultrasonic samples and the population standard
/// deviation of all their feature values.
inline nn::InputNormalization fit_normalization(const EchoDataset& data) {
  require(data.size() > 0, "cannot fit normalization on an empty set");
  nn::InputNormalization out;
  out.mean.assign(data.ultrasonic(0).features.size(), 0.0);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& m = data.ultrasonic(i).features.magnitudes;
    require(m.size() == out.mean.size(), "feature shapes differ across samples");
    for (std::size_t k = 0; k < m.size(); ++k) {
      out.mean[k] += m[k];
      sum += m[k];
      sum_sq += m[k] * m[k];
    }
  }
  const double count = double(data.size()) * double(out.mean.size());
  for (auto& v : out.mean) v /= double(data.size());
  const double mu = sum / count;
  const double var = std::max(0.0, sum_sq / count - mu * mu);
  out.scale = var > 0.0 ? std::sqrt(var) : 1.0;
  return out;
}

/// Per-sample RMSE on ultrasonic features only, whatever mode produced `net`.
template <typename T>
EvalResult evaluate(const nn::EchoNet<T>& net, const EchoDataset& data, int batch_size = 8) {
  require(data.size() > 0, "evaluation set is empty");
  EvalResult out;
  for (std::size_t start = 0; start < data.size(); start += std::size_t(batch_size)) {
    const std::size_t end = std::min(data.size(), start + std::size_t(batch_size));
    std::vector<const EchoSample*> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&data.ultrasonic(i));
    const auto predicted = net.forward(features_tensor<T>(batch));
    const auto truth = depth_tensor<T>(batch);
    const std::size_t per = truth.numel() / batch.size();
    for (std::size_t b = 0; b < batch.size(); ++b) {
      double sq = 0.0;
      for (std::size_t k = b * per; k < (b + 1) * per; ++k) {
        const double d = double(predicted.data()[k]) - double(truth.data()[k]);
        sq += d * d;
      }
      out.rows.push_back({batch[b]->scene_id, std::sqrt(sq / double(per))});
    }
  }
  double total = 0.0;
  for (const auto& r : out.rows) total += r.rmse;
  out.mean_rmse = total / double(out.rows.size());
  return out;
}

/// Trains one network for `seed`. kProposed optimizes the scheduled dual
/// objective; the baselines optimize RMSE on ultrasonic or on mixed echoes.
inline TrainResult train(const TrainConfig& config, std::uint64_t seed, const EchoDataset& data,
                         const augment::MixPolicy& policy, const nn::NetworkConfig& network) {
  config.validate();
  require(data.size() > 0, "training set is empty");
  if (config.mode != TrainMode::kUltrasonicOnly) policy.validate();

  nn::EchoNet<float> net(network, derive_seed(seed, 0));
  if (config.normalize_inputs) net.set_normalization(fit_normalization(data));
  nn::Adam<float> optimizer(net.parameters(), {.learning_rate = config.learning_rate});
  std::mt19937_64 shuffle_rng(derive_seed(seed, 1));
  std::mt19937_64 alpha_rng(derive_seed(seed, 2));

  const std::size_t n = data.size();
  const std::size_t batches = (n + std::size_t(config.batch_size) - 1) / std::size_t(config.batch_size);
  const std::int64_t total_steps = std::int64_t(batches) * config.epochs;
  const std::int64_t schedule_span = std::max<std::int64_t>(1, total_steps - 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::int64_t step = 0;

  std::vector<EpochRecord> trace;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0, ultrasonic_sum = 0.0, lambda = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * std::size_t(config.batch_size);
      const std::size_t end = std::min(n, begin + std::size_t(config.batch_size));
      std::vector<const EchoSample*> us;
      std::vector<EchoSample> mixed;
      for (std::size_t i = begin; i < end; ++i) us.push_back(&data.ultrasonic(order[i]));
      if (config.mode != TrainMode::kUltrasonicOnly) {
        for (std::size_t i = begin; i < end; ++i) {
          const double alpha = augment::sample_alpha(alpha_rng);
          mixed.push_back(augment::mix(data.ultrasonic(order[i]), data.auxiliary(order[i]), alpha, policy));
        }
      }
      std::vector<const EchoSample*> aug;
      for (const auto& m : mixed) aug.push_back(&m);
      const auto truth = depth_tensor<float>(us);

      optimizer.zero_grad();
      Tensor<float> objective;
      double ultrasonic_rmse = std::numeric_limits<double>::quiet_NaN();
      switch (config.mode) {
        case TrainMode::kUltrasonicOnly:
          objective = rmse_loss(net.forward(features_tensor<float>(us)), truth);
          ultrasonic_rmse = objective.item();
          lambda = 0.0;
          break;
        case TrainMode::kAugmentedOnly:
          objective = rmse_loss(net.forward(features_tensor<float>(aug)), truth);
          lambda = 1.0;
          break;
        case TrainMode::kProposed: {
          lambda = lambda_at(std::min(step, schedule_span), schedule_span);
          auto dual = total_loss(net, features_tensor<float>(us), features_tensor<float>(aug), truth, lambda);
          objective = dual.total;
          ultrasonic_rmse = dual.ultrasonic;
          break;
        }
      }
      if (!std::isfinite(objective.item())) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", step " + std::to_string(step));
      }
      nn::backward(objective);
      optimizer.step();
      loss_sum += objective.item();
      ultrasonic_sum += ultrasonic_rmse;
      ++step;
    }
    trace.push_back({epoch, loss_sum / double(batches), ultrasonic_sum / double(batches), lambda});
  }

  TrainResult result{std::move(net), std::move(trace), 0.0};
  result.final_ultrasonic_rmse = evaluate(result.net, data, config.batch_size).mean_rmse;
  return result;
}

}  // namespace echodepth::training
