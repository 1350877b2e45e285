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

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <functional>
#include <random>

#include "echodepth/nn/adam.hpp"
#include "echodepth/nn/conv.hpp"
#include "echodepth/nn/network.hpp"
#include "echodepth/nn/tensor.hpp"

namespace nn = echodepth::nn;
using TensorD = nn::Tensor<double>;

namespace {

TensorD random_tensor(nn::Shape shape, std::mt19937_64& rng, bool grad = false, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(nn::element_count(shape));
  for (auto& x : v) x = g(rng);
  return TensorD::from(std::move(shape), std::move(v), grad);
}

double dot(const TensorD& a, const TensorD& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

// Direct cross-correlation loops, NCHW input and OCkk weights.
std::vector<double> naive_conv(const TensorD& x, const TensorD& w, const TensorD& b, int stride, int pad) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3), o = w.dim(0), k = w.dim(2);
  const int ho = (h + 2 * pad - k) / stride + 1, wo = (wd + 2 * pad - k) / stride + 1;
  std::vector<double> y(std::size_t(n) * o * ho * wo, 0.0);
  for (int bi = 0; bi < n; ++bi)
    for (int oc = 0; oc < o; ++oc)
      for (int i = 0; i < ho; ++i)
        for (int j = 0; j < wo; ++j) {
          double acc = b.data()[std::size_t(oc)];
          for (int ic = 0; ic < c; ++ic)
            for (int ki = 0; ki < k; ++ki)
              for (int kj = 0; kj < k; ++kj) {
                const int r = i * stride - pad + ki, q = j * stride - pad + kj;
                if (r < 0 || r >= h || q < 0 || q >= wd) continue;
                acc += w.data()[((std::size_t(oc) * c + ic) * k + ki) * k + kj] *
                       x.data()[((std::size_t(bi) * c + ic) * h + r) * wd + q];
              }
          y[((std::size_t(bi) * o + oc) * ho + i) * wo + j] = acc;
        }
  return y;
}

// Scatter-accumulate transposed convolution, weights Ci x Co x k x k.
std::vector<double> naive_deconv(const TensorD& x, const TensorD& w, const TensorD& b, int stride, int pad,
                                 int extra = 0) {
  const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3), co = w.dim(1), k = w.dim(2);
  const int ho = (h - 1) * stride - 2 * pad + k + extra, wo = (wd - 1) * stride - 2 * pad + k + extra;
  std::vector<double> y(std::size_t(n) * co * ho * wo, 0.0);
  for (int bi = 0; bi < n; ++bi) {
    for (int oc = 0; oc < co; ++oc)
      for (int i = 0; i < ho * wo; ++i) y[(std::size_t(bi) * co + oc) * ho * wo + i] = b.data()[std::size_t(oc)];
    for (int ic = 0; ic < ci; ++ic)
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < wd; ++j) {
          const double v = x.data()[((std::size_t(bi) * ci + ic) * h + i) * wd + j];
          for (int oc = 0; oc < co; ++oc)
            for (int ki = 0; ki < k; ++ki)
              for (int kj = 0; kj < k; ++kj) {
                const int r = i * stride - pad + ki, q = j * stride - pad + kj;
                if (r < 0 || r >= ho || q < 0 || q >= wo) continue;
                y[((std::size_t(bi) * co + oc) * ho + r) * wo + q] +=
                    v * w.data()[((std::size_t(ic) * co + oc) * k + ki) * k + kj];
              }
        }
  }
  return y;
}

// Largest relative gap between analytic and central-difference gradients.
double gradient_check(const std::vector<TensorD>& params, const std::function<TensorD()>& loss, double h = 1e-5) {
  for (auto p : params) p.zero_grad();
  nn::backward(loss());
  double worst = 0.0;
  for (auto p : params) {
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    for (std::size_t i = 0; i < p.numel(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + h;
      const double up = loss().item();
      p.data()[i] = saved - h;
      const double down = loss().item();
      p.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double scale = std::max(std::abs(analytic[i]), std::abs(numeric));
      if (scale < 1e-9) continue;
      worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
    }
  }
  return worst;
}

// Shapes seen by each layer of the default network at batch 1.
struct LayerShape {
  bool transposed;
  nn::Shape input, weights;
  int stride, padding;
};

std::vector<LayerShape> default_layer_shapes() {
  const nn::NetworkConfig c;
  std::vector<LayerShape> out;
  int ch = c.input_channels, h = c.input_bins, w = c.input_frames;
  for (const auto& l : c.conv) {
    out.push_back({false, {1, ch, h, w}, {l.channels, ch, l.kernel, l.kernel}, l.stride, l.padding});
    h = nn::conv_output_size(h, l.kernel, l.stride, l.padding);
    w = nn::conv_output_size(w, l.kernel, l.stride, l.padding);
    ch = l.channels;
  }
  h = w = 1;
  for (const auto& l : c.deconv) {
    out.push_back({true, {1, ch, h, w}, {ch, l.channels, l.kernel, l.kernel}, l.stride, l.padding});
    h = nn::deconv_output_size(h, l.kernel, l.stride, l.padding);
    w = nn::deconv_output_size(w, l.kernel, l.stride, l.padding);
    ch = l.channels;
  }
  return out;
}

}  // namespace

TEST(Conv2d, IdentityKernelAndZeroWeights) {
  std::mt19937_64 rng(1);
  const auto x = random_tensor({2, 3, 5, 6}, rng);
  std::vector<double> eye(9, 0.0);
  for (int c = 0; c < 3; ++c) eye[std::size_t(c) * 3 + std::size_t(c)] = 1.0;
  const auto w = TensorD::from({3, 3, 1, 1}, eye);
  const auto y = nn::conv2d(x, w, TensorD::zeros({3}), 1, 0);
  EXPECT_EQ(y.shape(), x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);

  const auto b = TensorD::from({4}, {0.5, -1.0, 2.0, 3.0});
  const auto z = nn::conv2d(x, TensorD::zeros({4, 3, 3, 3}), b, 1, 1);
  for (std::size_t i = 0; i < z.numel(); ++i) EXPECT_EQ(z.data()[i], b.data()[(i / 30) % 4]);
}

TEST(Conv2d, MatchesDirectLoops) {
  std::mt19937_64 rng(2);
  const auto x = random_tensor({1, 3, 5, 5}, rng), w = random_tensor({2, 3, 3, 3}, rng), b = random_tensor({2}, rng);
  const auto y = nn::conv2d(x, w, b, 1, 1);
  const auto oracle = naive_conv(x, w, b, 1, 1);
  ASSERT_EQ(y.numel(), oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(y.data()[i], oracle[i], 1e-12);

  const auto x2 = random_tensor({2, 2, 9, 7}, rng), w2 = random_tensor({3, 2, 4, 4}, rng);
  const auto b2 = random_tensor({3}, rng);
  const auto y2 = nn::conv2d(x2, w2, b2, 2, 1);
  const auto o2 = naive_conv(x2, w2, b2, 2, 1);
  for (std::size_t i = 0; i < o2.size(); ++i) EXPECT_NEAR(y2.data()[i], o2[i], 1e-12);
}

TEST(Conv2d, RejectsShapeMismatch) {
  std::mt19937_64 rng(3);
  const auto x = random_tensor({1, 3, 5, 5}, rng);
  EXPECT_THROW(nn::conv2d(x, random_tensor({2, 2, 3, 3}, rng), TensorD::zeros({2}), 1, 1), echodepth::InvalidArgument);
  EXPECT_THROW(nn::conv2d(x, random_tensor({2, 3, 3, 3}, rng), TensorD::zeros({3}), 1, 1), echodepth::InvalidArgument);
  EXPECT_THROW(nn::conv2d(x, random_tensor({2, 3, 9, 9}, rng), TensorD::zeros({2}), 1, 0), echodepth::InvalidArgument);
}

TEST(Deconv2d, IdentityAndScatterOracle) {
  std::mt19937_64 rng(4);
  const auto x = random_tensor({1, 2, 4, 3}, rng);
  const auto eye = TensorD::from({2, 2, 1, 1}, {1.0, 0.0, 0.0, 1.0});
  const auto y = nn::deconv2d(x, eye, TensorD::zeros({2}), 1, 0);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);

  const auto x2 = random_tensor({2, 3, 4, 5}, rng), w2 = random_tensor({3, 2, 4, 4}, rng);
  const auto b2 = random_tensor({2}, rng);
  const auto y2 = nn::deconv2d(x2, w2, b2, 2, 1);
  EXPECT_EQ(y2.shape(), (nn::Shape{2, 2, 8, 10}));
  const auto oracle = naive_deconv(x2, w2, b2, 2, 1);
  for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(y2.data()[i], oracle[i], 1e-12);

  const auto y3 = nn::deconv2d(x2, w2, b2, 2, 1, {1, 1});
  EXPECT_EQ(y3.shape(), (nn::Shape{2, 2, 9, 11}));
  const auto o3 = naive_deconv(x2, w2, b2, 2, 1, 1);
  for (std::size_t i = 0; i < o3.size(); ++i) EXPECT_NEAR(y3.data()[i], o3[i], 1e-12);
  EXPECT_THROW(nn::deconv2d(x2, w2, b2, 2, 1, {2, 0}), echodepth::InvalidArgument);
}

TEST(Deconv2d, StrideTwoDoublesSpatialDims) {
  for (int n : {1, 2, 4, 8, 16}) EXPECT_EQ(nn::deconv_output_size(n, 4, 2, 1), 2 * n);
  EXPECT_EQ(nn::deconv_output_size(32, 3, 1, 1), 32);
}

TEST(Deconv2d, AdjointOfConvForEveryDefaultLayer) {
  std::mt19937_64 rng(5);
  for (const auto& l : default_layer_shapes()) {
    // conv2d with weights W (Co x Ci) is adjoint to deconv2d with the same W read as Ci' x Co'.
    const auto w = random_tensor(l.weights, rng);
    if (!l.transposed) {
      const auto a = random_tensor(l.input, rng);
      const auto ca = nn::conv2d(a, w, TensorD::zeros({l.weights[0]}), l.stride, l.padding);
      const auto b = random_tensor(ca.shape(), rng);
      // Rows and columns a strided conv drops come back as output padding.
      const std::array<int, 2> extra{a.dim(2) - nn::deconv_output_size(ca.dim(2), l.weights[2], l.stride, l.padding),
                                     a.dim(3) - nn::deconv_output_size(ca.dim(3), l.weights[3], l.stride, l.padding)};
      const auto db = nn::deconv2d(b, w, TensorD::zeros({l.weights[1]}), l.stride, l.padding, extra);
      ASSERT_EQ(db.shape(), a.shape());
      const double lhs = dot(ca, b), rhs = dot(a, db);
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
    } else {
      const auto b = random_tensor(l.input, rng);
      const auto db = nn::deconv2d(b, w, TensorD::zeros({l.weights[1]}), l.stride, l.padding);
      const auto a = random_tensor(db.shape(), rng);
      const auto ca = nn::conv2d(a, w, TensorD::zeros({l.weights[0]}), l.stride, l.padding);
      ASSERT_EQ(ca.shape(), b.shape());
      const double lhs = dot(ca, b), rhs = dot(a, db);
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST(Backward, SumAndHalfSquaredNorm) {
  std::mt19937_64 rng(6);
  auto p = random_tensor({3, 4}, rng, true);
  nn::backward(nn::sum(p));
  for (double g : p.grad()) EXPECT_EQ(g, 1.0);
  p.zero_grad();
  nn::backward(nn::scale(nn::sum(nn::mul(p, p)), 0.5));
  for (std::size_t i = 0; i < p.numel(); ++i) EXPECT_NEAR(p.grad()[i], p.data()[i], 1e-15);
  EXPECT_THROW(nn::backward(p), echodepth::InvalidArgument);
}

TEST(Backward, EachLayerTypeMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  const auto x = random_tensor({2, 2, 6, 5}, rng, true);
  const auto w = random_tensor({3, 2, 3, 3}, rng, true, 0.5), b = random_tensor({3}, rng, true);
  const auto target = random_tensor({2, 3, 3, 3}, rng);
  EXPECT_LE(gradient_check({x, w, b}, [&] { return nn::sum(nn::mul(nn::conv2d(x, w, b, 2, 1), target)); }), 1e-6);

  const auto xd = random_tensor({2, 3, 3, 2}, rng, true);
  const auto wd = random_tensor({3, 2, 4, 4}, rng, true, 0.5), bd = random_tensor({2}, rng, true);
  const auto td = random_tensor({2, 2, 6, 4}, rng);
  EXPECT_LE(gradient_check({xd, wd, bd}, [&] { return nn::sum(nn::mul(nn::deconv2d(xd, wd, bd, 2, 1), td)); }), 1e-6);
  const auto tp = random_tensor({2, 2, 7, 4}, rng);
  EXPECT_LE(gradient_check({xd, wd, bd}, [&] { return nn::sum(nn::mul(nn::deconv2d(xd, wd, bd, 2, 1, {1, 0}), tp)); }),
            1e-6);

  const auto a = random_tensor({2, 3, 4, 4}, rng, true);
  const auto t = random_tensor({2, 3, 1, 1}, rng);
  EXPECT_LE(gradient_check({a}, [&] { return nn::sum(nn::mul(nn::global_average_pool(a), t)); }), 1e-6);
  EXPECT_LE(gradient_check({a}, [&] { return nn::sum(nn::mul(nn::relu(a), nn::relu(a))); }), 1e-6);
  EXPECT_LE(gradient_check({a}, [&] { return nn::sum(nn::scaled_sigmoid(a, 10.0)); }), 1e-6);
  const std::vector<double> offset(48, 0.25);
  EXPECT_LE(gradient_check({a}, [&] { return nn::sum(nn::mul(nn::standardize(a, offset, 3.0), a)); }), 1e-6);
  const auto truth = random_tensor({2, 3, 4, 4}, rng);
  EXPECT_LE(gradient_check({a}, [&] { return nn::rmse(a, truth); }), 1e-6);
}

TEST(Backward, TinyNetworkMatchesFiniteDifferences) {
  const auto config = nn::NetworkConfig::tiny();
  const nn::EchoNet<double> net(config, 17);
  std::mt19937_64 rng(8);
  const auto x = random_tensor(config.input_shape(2), rng);
  std::uniform_real_distribution<double> u(1.0, 9.0);
  std::vector<double> tv(2 * 16);
  for (auto& v : tv) v = u(rng);
  const auto truth = TensorD::from(config.output_shape(2), tv);
  const double worst = gradient_check(net.parameters(), [&] { return nn::rmse(net.forward(x), truth); });
  EXPECT_LE(worst, 1e-4);
}

TEST(Network, DefaultConfigShapes) {
  const nn::NetworkConfig c;
  EXPECT_NO_THROW(c.validate());
  const nn::EchoNet<float> net(c, 0);
  EXPECT_EQ(net.parameter_count(), 678081u);
  EXPECT_EQ(net.parameters().size(), 20u);
  auto bad = c;
  bad.output_height = 64;
  EXPECT_THROW(bad.validate(), echodepth::InvalidArgument);
  EXPECT_NE(c.hash(), bad.hash());
}

TEST(Network, OutputBoundsAndAnalyticMidpoint) {
  const auto config = nn::NetworkConfig::tiny();
  std::mt19937_64 rng(9);
  const nn::EchoNet<double> net(config, 3);
  const auto y = net.forward(random_tensor(config.input_shape(4), rng, false, 50.0));
  for (double v : y.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, config.max_depth);
  }
  std::vector<TensorD> zeros;
  for (const auto& s : config.parameter_shapes()) zeros.push_back(TensorD::zeros(s, true));
  const nn::EchoNet<double> flat(config, zeros);
  const auto mid = flat.forward(TensorD::zeros(config.input_shape(1)));
  for (double v : mid.data()) EXPECT_EQ(v, config.max_depth / 2.0);
}

TEST(Network, DoublingMaxDepthDoublesOutput) {
  auto config = nn::NetworkConfig::tiny();
  const nn::EchoNet<double> net(config, 4);
  config.max_depth *= 2.0;
  const nn::EchoNet<double> wide(config, net.parameters());
  std::mt19937_64 rng(10);
  const auto x = random_tensor(config.input_shape(2), rng);
  const auto a = net.forward(x), b = wide.forward(x);
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(b.data()[i], 2.0 * a.data()[i]);
}

TEST(Network, BatchEqualsSingletons) {
  const nn::NetworkConfig config;
  const nn::EchoNet<float> net(config, 5);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> v(nn::element_count(config.input_shape(8)));
  for (auto& x : v) x = u(rng);
  const auto batch = net.forward(nn::Tensor<float>::from(config.input_shape(8), v));
  const std::size_t per = v.size() / 8, out = batch.numel() / 8;
  for (int b = 0; b < 8; ++b) {
    std::vector<float> one(v.begin() + std::ptrdiff_t(b * per), v.begin() + std::ptrdiff_t((b + 1) * per));
    const auto y = net.forward(nn::Tensor<float>::from(config.input_shape(1), one));
    for (std::size_t i = 0; i < out; ++i) {
      const float ref = y.data()[i];
      EXPECT_NEAR(batch.data()[std::size_t(b) * out + i], ref, 1e-6f * std::abs(ref));
    }
  }
}

TEST(Network, NormalizationIsAppliedBeforeTheEncoder) {
  const auto config = nn::NetworkConfig::tiny();
  nn::EchoNet<double> net(config, 6);
  std::mt19937_64 rng(12);
  const auto x = random_tensor(config.input_shape(2), rng);
  nn::InputNormalization norm;
  norm.mean.assign(128, 0.0);
  for (std::size_t i = 0; i < norm.mean.size(); ++i) norm.mean[i] = 0.01 * double(i);
  norm.scale = 4.0;
  std::vector<double> manual(x.numel());
  for (std::size_t i = 0; i < manual.size(); ++i) manual[i] = (x.data()[i] - norm.mean[i % 128]) / 4.0;
  const auto expect = net.forward(TensorD::from(x.shape(), manual));
  net.set_normalization(norm);
  const auto got = net.forward(x);
  for (std::size_t i = 0; i < got.numel(); ++i) EXPECT_NEAR(got.data()[i], expect.data()[i], 1e-12);
  norm.mean.resize(5);
  EXPECT_THROW(net.set_normalization(norm), echodepth::InvalidArgument);
}

TEST(Network, RejectsWrongInputShape) {
  const nn::EchoNet<double> net(nn::NetworkConfig::tiny(), 0);
  EXPECT_THROW(net.forward(TensorD::zeros({1, 2, 8, 9})), echodepth::InvalidArgument);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  std::mt19937_64 rng(13);
  auto p = random_tensor({10}, rng, true);
  const std::vector<double> before(p.data().begin(), p.data().end());
  nn::Adam<double> opt({p});
  p.zero_grad();
  p.grad();
  opt.step();
  EXPECT_EQ(std::vector<double>(p.data().begin(), p.data().end()), before);
  EXPECT_EQ(opt.step_count(), 1);
}

TEST(Adam, FirstStepMovesEachElementByLearningRate) {
  std::mt19937_64 rng(14);
  auto p = random_tensor({50}, rng, true);
  const std::vector<double> before(p.data().begin(), p.data().end());
  auto g = p.grad();
  std::normal_distribution<double> n;
  for (auto& x : g) x = n(rng);
  const std::vector<double> grads(g.begin(), g.end());
  nn::Adam<double> opt({p});
  opt.step();
  for (std::size_t i = 0; i < p.numel(); ++i) {
    // m_hat = g and v_hat = g^2, so the step is lr * g / (|g| + eps).
    const double expect = 1e-4 * grads[i] / (std::abs(grads[i]) + 1e-8);
    EXPECT_NEAR(before[i] - p.data()[i], expect, 1e-15);
    EXPECT_NEAR(std::abs(before[i] - p.data()[i]), 1e-4, 1e-9);
  }
}

TEST(Adam, TwoStepsMatchClosedForm) {
  auto p = TensorD::from({1}, {1.0}, true);
  nn::Adam<double> opt({p}, {.learning_rate = 0.1});
  p.grad()[0] = 2.0;
  opt.step();
  p.grad()[0] = -1.0;
  opt.step();
  const double m1 = 0.1 * 2.0, v1 = 0.001 * 4.0;
  const double x1 = 1.0 - 0.1 * (m1 / 0.1) / (std::sqrt(v1 / 0.001) + 1e-8);
  const double m2 = 0.9 * m1 + 0.1 * -1.0, v2 = 0.999 * v1 + 0.001 * 1.0;
  const double c1 = 1.0 - 0.81, c2 = 1.0 - 0.999 * 0.999;
  const double x2 = x1 - 0.1 * (m2 / c1) / (std::sqrt(v2 / c2) + 1e-8);
  EXPECT_NEAR(p.data()[0], x2, 1e-14);
}

TEST(Adam, NonFiniteGradientAbortsBeforeUpdating) {
  auto p = TensorD::from({2}, {1.0, 2.0}, true);
  nn::Adam<double> opt({p});
  p.grad()[0] = 1.0;
  p.grad()[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(opt.step(), echodepth::NumericalError);
  EXPECT_EQ(p.data()[0], 1.0);
  EXPECT_EQ(opt.step_count(), 0);
}

TEST(Adam, IdenticalRunsAreBitIdentical) {
  auto run = [] {
    const auto config = nn::NetworkConfig::tiny();
    nn::EchoNet<float> net(config, 21);
    nn::Adam<float> opt(net.parameters());
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<float> x(nn::element_count(config.input_shape(2))), y(32);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = 5.0f * u(rng);
    const auto input = nn::Tensor<float>::from(config.input_shape(2), x);
    const auto truth = nn::Tensor<float>::from(config.output_shape(2), y);
    for (int s = 0; s < 20; ++s) {
      opt.zero_grad();
      nn::backward(nn::rmse(net.forward(input), truth));
      opt.step();
    }
    std::vector<float> flat;
    for (const auto& p : net.parameters()) flat.insert(flat.end(), p.data().begin(), p.data().end());
    return flat;
  };
  EXPECT_EQ(run(), run());
}
