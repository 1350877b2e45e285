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

#include <array>
#include <vector>

#include <Eigen/Core>

#include "echodepth/nn/tensor.hpp"

namespace echodepth::nn {

/// Geometry of one 2-D (de)convolution window.
struct Window2d {
  int kernel_h = 1, kernel_w = 1;
  int stride = 1;
  int padding = 0;
};

inline int conv_output_size(int in, int kernel, int stride, int padding) {
  const int span = in + 2 * padding - kernel;
  require(span >= 0, "convolution kernel exceeds padded input");
  return span / stride + 1;
}

/// `output_padding` extra rows (or columns) at the far edge recover input
/// sizes that a strided convolution maps onto the same output size.
inline int deconv_output_size(int in, int kernel, int stride, int padding, int output_padding = 0) {
  require(output_padding >= 0 && output_padding < stride, "output padding must lie in [0, stride)");
  const int out = (in - 1) * stride - 2 * padding + kernel + output_padding;
  require(out >= 1, "transposed convolution output is empty");
  return out;
}

namespace detail {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

/// Unfolds a C x H x W image into (C kh kw) x (Ho Wo) patch columns.
template <typename T>
void im2col(const T* image, int channels, int height, int width, const Window2d& w, int out_h, int out_w, T* col) {
  const std::size_t cols = std::size_t(out_h) * std::size_t(out_w);
  for (int c = 0; c < channels; ++c)
    for (int ki = 0; ki < w.kernel_h; ++ki)
      for (int kj = 0; kj < w.kernel_w; ++kj) {
        T* row = col + (std::size_t((c * w.kernel_h + ki) * w.kernel_w + kj)) * cols;
        for (int oh = 0; oh < out_h; ++oh) {
          const int ih = oh * w.stride - w.padding + ki;
          T* dst = row + std::size_t(oh) * std::size_t(out_w);
          if (ih < 0 || ih >= height) {
            std::fill(dst, dst + out_w, T(0));
            continue;
          }
          const T* src = image + (std::size_t(c) * std::size_t(height) + std::size_t(ih)) * std::size_t(width);
          for (int ow = 0; ow < out_w; ++ow) {
            const int iw = ow * w.stride - w.padding + kj;
            dst[ow] = (iw >= 0 && iw < width) ? src[iw] : T(0);
          }
        }
      }
}

/// Adjoint of im2col: scatter-adds patch columns back into the image.
template <typename T>
void col2im(const T* col, int channels, int height, int width, const Window2d& w, int out_h, int out_w, T* image) {
  const std::size_t cols = std::size_t(out_h) * std::size_t(out_w);
  for (int c = 0; c < channels; ++c)
    for (int ki = 0; ki < w.kernel_h; ++ki)
      for (int kj = 0; kj < w.kernel_w; ++kj) {
        const T* row = col + (std::size_t((c * w.kernel_h + ki) * w.kernel_w + kj)) * cols;
        for (int oh = 0; oh < out_h; ++oh) {
          const int ih = oh * w.stride - w.padding + ki;
          if (ih < 0 || ih >= height) continue;
          const T* src = row + std::size_t(oh) * std::size_t(out_w);
          T* dst = image + (std::size_t(c) * std::size_t(height) + std::size_t(ih)) * std::size_t(width);
          for (int ow = 0; ow < out_w; ++ow) {
            const int iw = ow * w.stride - w.padding + kj;
            if (iw >= 0 && iw < width) dst[iw] += src[ow];
          }
        }
      }
}

}  // namespace detail

/// Cross-correlation. input N x C x H x W, weights O x C x kh x kw, bias O.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias, int stride, int padding) {
  require(input.rank() == 4 && weights.rank() == 4 && bias.rank() == 1, "conv2d: expected NCHW, OCkk and O shapes");
  require(stride >= 1 && padding >= 0, "conv2d: invalid stride or padding");
  if (input.dim(1) != weights.dim(1) || bias.dim(0) != weights.dim(0)) {
    throw InvalidArgument("conv2d: channel mismatch between input " + shape_string(input.shape()) + " and weights " +
                          shape_string(weights.shape()));
  }
  const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int o = weights.dim(0);
  const Window2d win{weights.dim(2), weights.dim(3), stride, padding};
  const int oh = conv_output_size(h, win.kernel_h, stride, padding);
  const int ow = conv_output_size(w, win.kernel_w, stride, padding);
  const int k = c * win.kernel_h * win.kernel_w;
  const int p = oh * ow;
  const std::size_t in_plane = std::size_t(c) * std::size_t(h) * std::size_t(w);
  const std::size_t out_plane = std::size_t(o) * std::size_t(p);
  const std::size_t col_size = std::size_t(k) * std::size_t(p);

  auto cols = std::make_shared<Buffer<T>>(std::size_t(n) * col_size);
  Buffer<T> out(std::size_t(n) * out_plane);
  const detail::ConstMatrixMap<T> wm(weights.data().data(), o, k);
  const Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bv(bias.data().data(), o);
  for (int b = 0; b < n; ++b) {
    T* col = cols->data() + std::size_t(b) * col_size;
    detail::im2col(input.data().data() + std::size_t(b) * in_plane, c, h, w, win, oh, ow, col);
    detail::MatrixMap<T> om(out.data() + std::size_t(b) * out_plane, o, p);
    om.noalias() = wm * detail::ConstMatrixMap<T>(col, k, p);
    om.colwise() += bv;
  }

  auto result = Tensor<T>::make_result({n, o, oh, ow}, std::move(out), {input, weights, bias});
  Node<T>* res = result.node().get();
  Node<T>* ni = input.node().get();
  Node<T>* nw = weights.node().get();
  Node<T>* nb = bias.node().get();
  result.set_backward([=] {
    const detail::ConstMatrixMap<T> wmat(nw->value.data(), o, k);
    Buffer<T> dcol(ni->requires_grad ? col_size : 0);
    for (int b = 0; b < n; ++b) {
      const detail::ConstMatrixMap<T> g(res->grad.data() + std::size_t(b) * out_plane, o, p);
      const detail::ConstMatrixMap<T> col(cols->data() + std::size_t(b) * col_size, k, p);
      if (nw->requires_grad) detail::MatrixMap<T>(nw->ensure_grad().data(), o, k).noalias() += g * col.transpose();
      if (nb->requires_grad) {
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(nb->ensure_grad().data(), o) += g.rowwise().sum();
      }
      if (ni->requires_grad) {
        detail::MatrixMap<T>(dcol.data(), k, p).noalias() = wmat.transpose() * g;
        detail::col2im(dcol.data(), c, h, w, win, oh, ow, ni->ensure_grad().data() + std::size_t(b) * in_plane);
      }
    }
  });
  return result;
}

/// Transposed convolution, the adjoint of conv2d with respect to its input.
/// input N x Ci x H x W, weights Ci x Co x kh x kw, bias Co. output_padding
/// holds the extra {rows, columns}.
template <typename T>
Tensor<T> deconv2d(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias, int stride, int padding,
                   std::array<int, 2> output_padding = {0, 0}) {
  require(input.rank() == 4 && weights.rank() == 4 && bias.rank() == 1, "deconv2d: expected NCHW, IOkk and O shapes");
  require(stride >= 1 && padding >= 0, "deconv2d: invalid stride or padding");
  if (input.dim(1) != weights.dim(0) || bias.dim(0) != weights.dim(1)) {
    throw InvalidArgument("deconv2d: channel mismatch between input " + shape_string(input.shape()) +
                          " and weights " + shape_string(weights.shape()));
  }
  const int n = input.dim(0), ci = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int co = weights.dim(1);
  const Window2d win{weights.dim(2), weights.dim(3), stride, padding};
  const int oh = deconv_output_size(h, win.kernel_h, stride, padding, output_padding[0]);
  const int ow = deconv_output_size(w, win.kernel_w, stride, padding, output_padding[1]);
  const int k = co * win.kernel_h * win.kernel_w;
  const int p = h * w;
  const std::size_t in_plane = std::size_t(ci) * std::size_t(p);
  const std::size_t out_plane = std::size_t(co) * std::size_t(oh) * std::size_t(ow);
  const std::size_t col_size = std::size_t(k) * std::size_t(p);

  Buffer<T> out(std::size_t(n) * out_plane, T(0));
  Buffer<T> col(col_size);
  const detail::ConstMatrixMap<T> wm(weights.data().data(), ci, k);
  for (int b = 0; b < n; ++b) {
    detail::MatrixMap<T>(col.data(), k, p).noalias() =
        wm.transpose() * detail::ConstMatrixMap<T>(input.data().data() + std::size_t(b) * in_plane, ci, p);
    T* dst = out.data() + std::size_t(b) * out_plane;
    detail::col2im(col.data(), co, oh, ow, win, h, w, dst);
    const std::size_t plane = std::size_t(oh) * std::size_t(ow);
    for (int c = 0; c < co; ++c) {
      const T bc = bias.data()[std::size_t(c)];
      for (std::size_t i = 0; i < plane; ++i) dst[std::size_t(c) * plane + i] += bc;
    }
  }

  auto result = Tensor<T>::make_result({n, co, oh, ow}, std::move(out), {input, weights, bias});
  Node<T>* res = result.node().get();
  Node<T>* ni = input.node().get();
  Node<T>* nw = weights.node().get();
  Node<T>* nb = bias.node().get();
  result.set_backward([=] {
    const detail::ConstMatrixMap<T> wmat(nw->value.data(), ci, k);
    Buffer<T> dcol(col_size);
    const std::size_t plane = std::size_t(oh) * std::size_t(ow);
    for (int b = 0; b < n; ++b) {
      const T* g = res->grad.data() + std::size_t(b) * out_plane;
      detail::im2col(g, co, oh, ow, win, h, w, dcol.data());
      const detail::ConstMatrixMap<T> dc(dcol.data(), k, p);
      if (ni->requires_grad) {
        detail::MatrixMap<T>(ni->ensure_grad().data() + std::size_t(b) * in_plane, ci, p).noalias() += wmat * dc;
      }
      if (nw->requires_grad) {
        const detail::ConstMatrixMap<T> x(ni->value.data() + std::size_t(b) * in_plane, ci, p);
        detail::MatrixMap<T>(nw->ensure_grad().data(), ci, k).noalias() += x * dc.transpose();
      }
      if (nb->requires_grad) {
        auto& gb = nb->ensure_grad();
        for (int c = 0; c < co; ++c) {
          T s = T(0);
          for (std::size_t i = 0; i < plane; ++i) s += g[std::size_t(c) * plane + i];
          gb[std::size_t(c)] += s;
        }
      }
    }
  });
  return result;
}

}  // namespace echodepth::nn
