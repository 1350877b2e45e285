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
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "echodepth/error.hpp"

namespace echodepth::nn {

using Shape = std::vector<int>;

inline std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    require(d > 0, "tensor dimensions must be positive");
    n *= std::size_t(d);
  }
  return n;
}

inline std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + ")";
}

/// Tensor storage. A fixed base alignment keeps Eigen's vectorized loops on
/// the same split, and so the same rounding, from run to run.
template <typename T>
using Buffer = std::vector<T, Eigen::aligned_allocator<T>>;

/// One record on the gradient tape. `backward` reads `grad` and accumulates
/// into the parents' gradients.
template <typename T>
struct Node {
  Shape shape;
  Buffer<T> value;
  Buffer<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backward;

  Buffer<T>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    return grad;
  }
};

/// Shared handle to a tape node. Copies alias the same storage.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    const std::size_t n = element_count(shape);
    return from(std::move(shape), Buffer<T>(n, T(0)), requires_grad);
  }

  static Tensor from(Shape shape, const std::vector<T>& values, bool requires_grad = false) {
    return from(std::move(shape), Buffer<T>(values.begin(), values.end()), requires_grad);
  }

  static Tensor from(Shape shape, std::initializer_list<T> values, bool requires_grad = false) {
    return from(std::move(shape), Buffer<T>(values), requires_grad);
  }

  static Tensor from(Shape shape, Buffer<T> values, bool requires_grad = false) {
    require(values.size() == element_count(shape), "tensor data does not match shape " + shape_string(shape));
    auto node = std::make_shared<Node<T>>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<T> data() { return node_->value; }
  std::span<const T> data() const { return node_->value; }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  std::span<T> grad() { return node_->ensure_grad(); }
  std::span<const T> grad() const { return node_->ensure_grad(); }
  void zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), T(0)); }

  T item() const {
    require(numel() == 1, "item() needs a single-element tensor");
    return node_->value[0];
  }

  const std::shared_ptr<Node<T>>& node() const { return node_; }

  /// Result of an op on `inputs`; records `backward` only when some input is differentiable.
  static Tensor make_result(Shape shape, Buffer<T> values, std::vector<Tensor> inputs) {
    Tensor out = from(std::move(shape), std::move(values));
    for (const auto& in : inputs) {
      if (in.requires_grad()) out.node_->requires_grad = true;
    }
    if (out.node_->requires_grad) {
      for (auto& in : inputs) out.node_->parents.push_back(in.node_);
    }
    return out;
  }

  void set_backward(std::function<void()> fn) {
    if (node_->requires_grad) node_->backward = std::move(fn);
  }

 private:
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}
  std::shared_ptr<Node<T>> node_;
};

/// Reverse-mode sweep from a scalar loss. Gradients accumulate into every
/// differentiable leaf reachable from `loss`.
template <typename T>
void backward(const Tensor<T>& loss) {
  if (loss.numel() != 1) throw InvalidArgument("backward needs a scalar loss, got shape " + shape_string(loss.shape()));
  if (!loss.requires_grad()) return;

  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss.node()->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward();
  }
}

// Elementwise and reduction ops.

namespace detail {
template <typename T>
Node<T>& node_of(const Tensor<T>& t) {
  return *t.node();
}
}  // namespace detail

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "add: shape mismatch");
  Buffer<T> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] + b.data()[i];
  auto out = Tensor<T>::make_result(a.shape(), std::move(v), {a, b});
  Node<T>* o = out.node().get();
  Node<T>* na = a.node().get();
  Node<T>* nb = b.node().get();
  out.set_backward([o, na, nb] {
    for (Node<T>* n : {na, nb}) {
      if (!n->requires_grad) continue;
      auto& g = n->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o->grad[i];
    }
  });
  return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  Buffer<T> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * factor;
  auto out = Tensor<T>::make_result(a.shape(), std::move(v), {a});
  Node<T>* o = out.node().get();
  Node<T>* na = a.node().get();
  out.set_backward([o, na, factor] {
    auto& g = na->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o->grad[i] * factor;
  });
  return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "mul: shape mismatch");
  Buffer<T> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * b.data()[i];
  auto out = Tensor<T>::make_result(a.shape(), std::move(v), {a, b});
  Node<T>* o = out.node().get();
  Node<T>* na = a.node().get();
  Node<T>* nb = b.node().get();
  out.set_backward([o, na, nb] {
    if (na->requires_grad) {
      auto& g = na->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o->grad[i] * nb->value[i];
    }
    if (nb->requires_grad) {
      auto& g = nb->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o->grad[i] * na->value[i];
    }
  });
  return out;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T total = T(0);
  for (T x : a.data()) total += x;
  auto out = Tensor<T>::make_result({1}, {total}, {a});
  Node<T>* o = out.node().get();
  Node<T>* na = a.node().get();
  out.set_backward([o, na] {
    auto& g = na->ensure_grad();
    for (auto& x : g) x += o->grad[0];
  });
  return out;
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  return scale(sum(a), T(1) / T(a.numel()));
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  Buffer<T> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] > T(0) ? a.data()[i] : T(0);
  auto out = Tensor<T>::make_result(a.shape(), std::move(v), {a});
  Node<T>* o = out.node().get();
  Node<T>* na = a.node().get();
  out.set_backward([o, na] {
    auto& g = na->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (na->value[i] > T(0)) g[i] += o->grad[i];
    }
  });
  return out;
}

/// upper * logistic(a); bounds the output to (0, upper).
template <typename T>
Tensor<T> scaled_sigmoid(const Tensor<T>& a, T upper) {
  Buffer<T> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = upper / (T(1) + std::exp(-a.data()[i]));
  auto out = Tensor<T>::make_result(a.shape(), std::move(v), {a});
  Node<T>* o = out.node().get();
  Node<T>* na = a.node().get();
  out.set_backward([o, na, upper] {
    auto& g = na->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T y = o->value[i];
      g[i] += o->grad[i] * y * (T(1) - y / upper);
    }
  });
  return out;
}

/// Same storage order under a new shape with equal element count.
template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  require(element_count(shape) == a.numel(), "reshape: element count mismatch");
  Buffer<T> v(a.data().begin(), a.data().end());
  auto out = Tensor<T>::make_result(std::move(shape), std::move(v), {a});
  Node<T>* o = out.node().get();
  Node<T>* na = a.node().get();
  out.set_backward([o, na] {
    auto& g = na->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o->grad[i];
  });
  return out;
}

/// (a - offset) * gain, with `offset` repeated for every batch item.
template <typename T>
Tensor<T> standardize(const Tensor<T>& a, const std::vector<T>& offset, T gain) {
  require(a.rank() >= 1 && !offset.empty(), "standardize: empty input");
  const std::size_t per = offset.size();
  require(a.numel() % per == 0 && a.numel() / per == std::size_t(a.dim(0)), "standardize: offset size mismatch");
  Buffer<T> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (a.data()[i] - offset[i % per]) * gain;
  auto out = Tensor<T>::make_result(a.shape(), std::move(v), {a});
  Node<T>* o = out.node().get();
  Node<T>* na = a.node().get();
  out.set_backward([o, na, gain] {
    auto& g = na->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o->grad[i] * gain;
  });
  return out;
}

/// Mean over the spatial axes of an NCHW tensor, giving N x C x 1 x 1.
template <typename T>
Tensor<T> global_average_pool(const Tensor<T>& a) {
  require(a.rank() == 4, "global_average_pool expects NCHW");
  const int n = a.dim(0), c = a.dim(1);
  const std::size_t plane = std::size_t(a.dim(2)) * std::size_t(a.dim(3));
  Buffer<T> v(std::size_t(n) * std::size_t(c));
  for (std::size_t k = 0; k < v.size(); ++k) {
    T s = T(0);
    for (std::size_t i = 0; i < plane; ++i) s += a.data()[k * plane + i];
    v[k] = s / T(plane);
  }
  auto out = Tensor<T>::make_result({n, c, 1, 1}, std::move(v), {a});
  Node<T>* o = out.node().get();
  Node<T>* na = a.node().get();
  out.set_backward([o, na, plane] {
    auto& g = na->ensure_grad();
    for (std::size_t k = 0; k < o->grad.size(); ++k) {
      const T share = o->grad[k] / T(plane);
      for (std::size_t i = 0; i < plane; ++i) g[k * plane + i] += share;
    }
  });
  return out;
}

/// Mean over samples of each sample's root-mean-square error; the leading axis
/// indexes samples. The subgradient at zero error is taken as zero.
template <typename T>
Tensor<T> rmse(const Tensor<T>& predicted, const Tensor<T>& truth) {
  if (predicted.shape() != truth.shape()) {
    throw InvalidArgument("rmse: shape mismatch " + shape_string(predicted.shape()) + " vs " +
                          shape_string(truth.shape()));
  }
  const int batch = predicted.dim(0);
  const std::size_t per = predicted.numel() / std::size_t(batch);
  Buffer<T> per_sample(static_cast<std::size_t>(batch));
  T total = T(0);
  for (int b = 0; b < batch; ++b) {
    T sq = T(0);
    for (std::size_t i = 0; i < per; ++i) {
      const T d = predicted.data()[std::size_t(b) * per + i] - truth.data()[std::size_t(b) * per + i];
      sq += d * d;
    }
    per_sample[std::size_t(b)] = std::sqrt(sq / T(per));
    total += per_sample[std::size_t(b)];
  }
  auto out = Tensor<T>::make_result({1}, {total / T(batch)}, {predicted, truth});
  Node<T>* o = out.node().get();
  Node<T>* np = predicted.node().get();
  Node<T>* nt = truth.node().get();
  out.set_backward([o, np, nt, per_sample, per, batch] {
    for (int b = 0; b < batch; ++b) {
      const T r = per_sample[std::size_t(b)];
      if (r == T(0)) continue;
      const T coeff = o->grad[0] / (T(batch) * T(per) * r);
      for (std::size_t i = 0; i < per; ++i) {
        const std::size_t k = std::size_t(b) * per + i;
        const T d = np->value[k] - nt->value[k];
        if (np->requires_grad) np->ensure_grad()[k] += coeff * d;
        if (nt->requires_grad) nt->ensure_grad()[k] -= coeff * d;
      }
    }
  });
  return out;
}

}  // namespace echodepth::nn
