// Copyright 2026 The isogeo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "isogeo/flow.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "isogeo/errors.hpp"

namespace isogeo {

// ---------------------------------------------------------------------------
// FlowConfig

std::size_t FlowConfig::data_dim() const {
  return kind == DataKind::Vector ? dim : image.size();
}

void FlowConfig::validate() const {
  if (blocks < 1) throw ConfigError("flow config: blocks must be >= 1");
  if (activation_order < 1) throw ConfigError("flow config: activation order must be >= 1");
  if (init_scale < 0.0 || !std::isfinite(init_scale))
    throw ConfigError("flow config: init_scale must be finite and >= 0");
  if (kind == DataKind::Vector) {
    if (dim < 2) throw ConfigError("flow config: vector dimension must be >= 2");
    if (coupling == CouplingNetKind::Conv)
      throw ConfigError("flow config: conv coupling requires image data");
    if (householder_reflections < 0)
      throw ConfigError("flow config: householder reflections must be >= 0");
    if (coupling == CouplingNetKind::FixedFilter &&
        (fixed_filter.empty() || fixed_filter.size() % 2 == 0))
      throw ConfigError("flow config: fixed filter needs odd length");
    for (std::size_t w : hidden)
      if (w == 0) throw ConfigError("flow config: zero hidden width");
  } else {
    if (image.channels == 0 || image.height == 0 || image.width == 0)
      throw ConfigError("flow config: empty image shape");
    if (coupling != CouplingNetKind::Conv)
      throw ConfigError("flow config: image data requires conv coupling");
    if (kernel_size % 2 == 0 || linear_kernel_size % 2 == 0)
      throw ConfigError("flow config: kernel sizes must be odd");
    if (hidden.empty()) throw ConfigError("flow config: conv coupling needs hidden channels");
    for (std::size_t c : hidden)
      if (c == 0) throw ConfigError("flow config: zero hidden channel count");
  }
}

FlowConfig FlowConfig::double_gaussian() {
  FlowConfig c;
  c.kind = DataKind::Vector;
  c.dim = 2;
  c.blocks = 2;
  c.activation_order = 2;
  c.coupling = CouplingNetKind::FixedFilter;
  c.householder_reflections = 2;
  return c;
}

FlowConfig FlowConfig::hemisphere() {
  FlowConfig c = double_gaussian();
  c.dim = 3;
  c.blocks = 3;
  c.householder_reflections = 3;
  return c;
}

FlowConfig FlowConfig::mnist_reduced() {
  FlowConfig c;
  c.kind = DataKind::Image;
  c.image = {1, 28, 28};
  c.blocks = 2;
  c.activation_order = 6;
  c.coupling = CouplingNetKind::Conv;
  c.hidden = {16, 16};
  c.kernel_size = 5;
  c.linear_kernel_size = 5;
  return c;
}

// ---------------------------------------------------------------------------
// ParamVector

std::size_t ParamVector::append(std::string name, std::size_t length) {
  if (find(name) != nullptr) throw ConfigError("duplicate parameter block " + name);
  const std::size_t offset = values_.size();
  layout_.push_back({std::move(name), offset, length});
  values_.resize(offset + length, 0.0);
  return offset;
}

const ParamBlock* ParamVector::find(std::string_view name) const {
  for (const auto& b : layout_)
    if (b.name == name) return &b;
  return nullptr;
}

std::span<double> ParamVector::block(std::string_view name) {
  const ParamBlock* b = find(name);
  if (b == nullptr) throw ConfigError("unknown parameter block " + std::string(name));
  return std::span<double>(values_).subspan(b->offset, b->length);
}

std::span<const double> ParamVector::block(std::string_view name) const {
  const ParamBlock* b = find(name);
  if (b == nullptr) throw ConfigError("unknown parameter block " + std::string(name));
  return std::span<const double>(values_).subspan(b->offset, b->length);
}

namespace {

void init_activation(std::span<double> coeffs, std::size_t order) {
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = (i % order == 0) ? 1.0 : 0.0;
}

void fill_normal(std::span<double> out, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : out) v = scale * n(rng);
}

// Accumulates d sigma(z)/d a_k = tanh(z)^k times g into grad.
void activation_coeff_grad(std::span<double> grad, double z, double g) {
  const double t = std::tanh(z);
  double p = 1.0;
  for (double& ga : grad) {
    p *= t;
    ga += g * p;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// FixedFilterNet

FixedFilterNet::FixedFilterNet(std::size_t dim, std::vector<double> taps, int order)
    : dim_(dim), taps_(std::move(taps)), order_(static_cast<std::size_t>(order)) {}

void FixedFilterNet::initialize(std::span<double> params, double, std::mt19937_64&) const {
  init_activation(params, order_);
}

void FixedFilterNet::eval(std::span<const double> params, std::span<const double> u,
                          std::span<double> out) const {
  Vector c(dim_);
  fixed_filter_apply(taps_, u, c);
  for (std::size_t j = 0; j < dim_; ++j)
    out[j] = tanh_poly(params.subspan(j * order_, order_), c[j]);
}

void FixedFilterNet::jvp(std::span<const double> params, std::span<const double> u,
                         std::span<const double> du, std::span<double> out) const {
  Vector c(dim_), dc(dim_);
  fixed_filter_apply(taps_, u, c);
  fixed_filter_apply(taps_, du, dc);
  for (std::size_t j = 0; j < dim_; ++j)
    out[j] = tanh_poly_derivative(params.subspan(j * order_, order_), c[j]) * dc[j];
}

void FixedFilterNet::vjp(std::span<const double> params, std::span<const double> u,
                         std::span<const double> g, std::span<double> grad_u,
                         std::span<double> grad_params) const {
  Vector c(dim_), gc(dim_);
  fixed_filter_apply(taps_, u, c);
  for (std::size_t j = 0; j < dim_; ++j) {
    if (g[j] == 0.0) continue;
    gc[j] = tanh_poly_derivative(params.subspan(j * order_, order_), c[j]) * g[j];
    activation_coeff_grad(grad_params.subspan(j * order_, order_), c[j], g[j]);
  }
  fixed_filter_adjoint(taps_, gc, grad_u);
}

// ---------------------------------------------------------------------------
// FeedForwardNet

FeedForwardNet::FeedForwardNet(std::size_t dim, std::vector<std::size_t> hidden, int order)
    : order_(static_cast<std::size_t>(order)) {
  std::vector<std::size_t> widths{dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(dim);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Layer layer{widths[l], widths[l + 1], 0, 0, 0, l + 2 < widths.size()};
    layer.w_off = count_;
    count_ += layer.in * layer.out;
    layer.b_off = count_;
    count_ += layer.out;
    layer.a_off = count_;
    if (layer.activated) count_ += layer.out * order_;
    layers_.push_back(layer);
  }
}

void FeedForwardNet::initialize(std::span<double> params, double scale,
                                std::mt19937_64& rng) const {
  for (const Layer& l : layers_) {
    fill_normal(params.subspan(l.w_off, l.in * l.out), scale, rng);
    std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(l.b_off), l.out, 0.0);
    if (l.activated) init_activation(params.subspan(l.a_off, l.out * order_), order_);
  }
}

void FeedForwardNet::eval(std::span<const double> params, std::span<const double> u,
                          std::span<double> out) const {
  Vector h(u.begin(), u.end());
  for (const Layer& l : layers_) {
    Vector z(l.out);
    for (std::size_t o = 0; o < l.out; ++o)
      z[o] = params[l.b_off + o] + dot(params.subspan(l.w_off + o * l.in, l.in), h);
    if (l.activated)
      for (std::size_t o = 0; o < l.out; ++o)
        z[o] = tanh_poly(params.subspan(l.a_off + o * order_, order_), z[o]);
    h = std::move(z);
  }
  std::copy(h.begin(), h.end(), out.begin());
}

void FeedForwardNet::jvp(std::span<const double> params, std::span<const double> u,
                         std::span<const double> du, std::span<double> out) const {
  Vector h(u.begin(), u.end());
  Vector dh(du.begin(), du.end());
  for (const Layer& l : layers_) {
    Vector z(l.out), dz(l.out);
    for (std::size_t o = 0; o < l.out; ++o) {
      auto w = params.subspan(l.w_off + o * l.in, l.in);
      z[o] = params[l.b_off + o] + dot(w, h);
      dz[o] = dot(w, dh);
    }
    if (l.activated) {
      for (std::size_t o = 0; o < l.out; ++o) {
        const auto e = tanh_poly_eval(params.subspan(l.a_off + o * order_, order_), z[o]);
        z[o] = e.value;
        dz[o] *= e.derivative;
      }
    }
    h = std::move(z);
    dh = std::move(dz);
  }
  std::copy(dh.begin(), dh.end(), out.begin());
}

void FeedForwardNet::vjp(std::span<const double> params, std::span<const double> u,
                         std::span<const double> g, std::span<double> grad_u,
                         std::span<double> grad_params) const {
  std::vector<Vector> inputs, pre;
  Vector h(u.begin(), u.end());
  for (const Layer& l : layers_) {
    inputs.push_back(h);
    Vector z(l.out);
    for (std::size_t o = 0; o < l.out; ++o)
      z[o] = params[l.b_off + o] + dot(params.subspan(l.w_off + o * l.in, l.in), h);
    pre.push_back(z);
    if (l.activated)
      for (std::size_t o = 0; o < l.out; ++o)
        z[o] = tanh_poly(params.subspan(l.a_off + o * order_, order_), z[o]);
    h = std::move(z);
  }
  Vector gh(g.begin(), g.end());
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& l = layers_[li];
    Vector gz = gh;
    if (l.activated) {
      for (std::size_t o = 0; o < l.out; ++o) {
        auto a = params.subspan(l.a_off + o * order_, order_);
        activation_coeff_grad(grad_params.subspan(l.a_off + o * order_, order_), pre[li][o],
                              gh[o]);
        gz[o] = gh[o] * tanh_poly_derivative(a, pre[li][o]);
      }
    }
    Vector gin(l.in, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
      if (gz[o] == 0.0) continue;
      grad_params[l.b_off + o] += gz[o];
      for (std::size_t i = 0; i < l.in; ++i) {
        grad_params[l.w_off + o * l.in + i] += gz[o] * inputs[li][i];
        gin[i] += params[l.w_off + o * l.in + i] * gz[o];
      }
    }
    gh = std::move(gin);
  }
  for (std::size_t i = 0; i < grad_u.size(); ++i) grad_u[i] += gh[i];
}

// ---------------------------------------------------------------------------
// ConvNet

ConvNet::ConvNet(std::size_t height, std::size_t width, std::vector<std::size_t> channels,
                 std::size_t kernel, int order)
    : height_(height), width_(width), order_(static_cast<std::size_t>(order)) {
  assert(channels.size() >= 2);
  for (std::size_t l = 0; l + 1 < channels.size(); ++l) {
    Layer layer{{channels[l], channels[l + 1], height, width, kernel},
                0, 0, 0, l + 2 < channels.size()};
    layer.k_off = count_;
    count_ += layer.shape.kernel_size();
    layer.b_off = count_;
    count_ += layer.shape.out_channels;
    layer.a_off = count_;
    if (layer.activated) count_ += layer.shape.out_channels * order_;
    layers_.push_back(layer);
  }
}

void ConvNet::initialize(std::span<double> params, double scale,
                         std::mt19937_64& rng) const {
  for (const Layer& l : layers_) {
    fill_normal(params.subspan(l.k_off, l.shape.kernel_size()), scale, rng);
    std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(l.b_off),
                l.shape.out_channels, 0.0);
    if (l.activated)
      init_activation(params.subspan(l.a_off, l.shape.out_channels * order_), order_);
  }
}

void ConvNet::run(std::span<const double> params, std::span<const double> u,
                  std::vector<Vector>& pre, std::vector<Vector>& post) const {
  const std::size_t hw = height_ * width_;
  pre.assign(layers_.size(), {});
  post.assign(layers_.size(), {});
  std::span<const double> in = u;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& l = layers_[li];
    pre[li].assign(l.shape.out_channels * hw, 0.0);
    conv2d_forward(l.shape, in, params.subspan(l.k_off, l.shape.kernel_size()),
                   params.subspan(l.b_off, l.shape.out_channels), pre[li]);
    post[li] = pre[li];
    if (l.activated) {
      for (std::size_t c = 0; c < l.shape.out_channels; ++c) {
        auto a = params.subspan(l.a_off + c * order_, order_);
        for (std::size_t k = 0; k < hw; ++k) post[li][c * hw + k] = tanh_poly(a, pre[li][c * hw + k]);
      }
    }
    in = post[li];
  }
}

void ConvNet::eval(std::span<const double> params, std::span<const double> u,
                   std::span<double> out) const {
  std::vector<Vector> pre, post;
  run(params, u, pre, post);
  std::copy(post.back().begin(), post.back().end(), out.begin());
}

void ConvNet::jvp(std::span<const double> params, std::span<const double> u,
                  std::span<const double> du, std::span<double> out) const {
  std::vector<Vector> pre, post;
  run(params, u, pre, post);
  const std::size_t hw = height_ * width_;
  Vector dh(du.begin(), du.end());
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& l = layers_[li];
    Vector dz(l.shape.out_channels * hw);
    conv2d_linear(l.shape, dh, params.subspan(l.k_off, l.shape.kernel_size()), dz);
    if (l.activated) {
      for (std::size_t c = 0; c < l.shape.out_channels; ++c) {
        auto a = params.subspan(l.a_off + c * order_, order_);
        for (std::size_t k = 0; k < hw; ++k)
          dz[c * hw + k] *= tanh_poly_derivative(a, pre[li][c * hw + k]);
      }
    }
    dh = std::move(dz);
  }
  std::copy(dh.begin(), dh.end(), out.begin());
}

void ConvNet::vjp(std::span<const double> params, std::span<const double> u,
                  std::span<const double> g, std::span<double> grad_u,
                  std::span<double> grad_params) const {
  std::vector<Vector> pre, post;
  run(params, u, pre, post);
  const std::size_t hw = height_ * width_;
  Vector gh(g.begin(), g.end());
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& l = layers_[li];
    Vector gz = gh;
    if (l.activated) {
      for (std::size_t c = 0; c < l.shape.out_channels; ++c) {
        auto a = params.subspan(l.a_off + c * order_, order_);
        auto ga = grad_params.subspan(l.a_off + c * order_, order_);
        for (std::size_t k = 0; k < hw; ++k) {
          const std::size_t idx = c * hw + k;
          if (gh[idx] == 0.0) {
            gz[idx] = 0.0;
            continue;
          }
          activation_coeff_grad(ga, pre[li][idx], gh[idx]);
          gz[idx] = gh[idx] * tanh_poly_derivative(a, pre[li][idx]);
        }
      }
    }
    std::span<const double> in = li == 0 ? u : std::span<const double>(post[li - 1]);
    conv2d_backward_params(l.shape, in, gz,
                           grad_params.subspan(l.k_off, l.shape.kernel_size()),
                           grad_params.subspan(l.b_off, l.shape.out_channels));
    if (li == 0) {
      conv2d_backward_input(l.shape, gz, params.subspan(l.k_off, l.shape.kernel_size()),
                            grad_u);
    } else {
      Vector gin(l.shape.in_channels * hw, 0.0);
      conv2d_backward_input(l.shape, gz, params.subspan(l.k_off, l.shape.kernel_size()),
                            gin);
      gh = std::move(gin);
    }
  }
}

// ---------------------------------------------------------------------------
// Couplings

namespace {

Vector masked(std::span<const double> x, const std::vector<std::uint8_t>& m) {
  Vector u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = m[i] ? x[i] : 0.0;
  return u;
}

}  // namespace

void coupling_forward(const CouplingNet& net, std::span<const double> params,
                      const CouplingMask& keep, std::span<double> x) {
  const auto m = keep.indicator();
  const Vector u = masked(x, m);
  Vector f(x.size());
  net.eval(params, u, f);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!m[i]) x[i] += f[i];
}

void coupling_inverse(const CouplingNet& net, std::span<const double> params,
                      const CouplingMask& keep, std::span<double> y) {
  const auto m = keep.indicator();
  const Vector u = masked(y, m);
  Vector f(y.size());
  net.eval(params, u, f);
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!m[i]) y[i] -= f[i];
}

namespace {

std::span<const double> conv_params_flat(const ConvCouplingParams& p, Vector& storage) {
  storage.assign(p.kernel.begin(), p.kernel.end());
  storage.insert(storage.end(), p.bias.begin(), p.bias.end());
  return storage;
}

ConvNet single_conv(const ConvCouplingParams& p) {
  return ConvNet(p.shape.height, p.shape.width, {p.shape.channels, p.shape.channels},
                 p.kernel_size, 1);
}

void check_conv_params(const ConvCouplingParams& p, std::size_t n) {
  if (n != p.shape.size())
    throw ShapeError("masked conv coupling: input size does not match image shape");
  const std::size_t c = p.shape.channels;
  if (p.kernel.size() != c * c * p.kernel_size * p.kernel_size || p.bias.size() != c)
    throw ShapeError("masked conv coupling: kernel/bias shape mismatch");
}

}  // namespace

void masked_conv_coupling_forward(const ConvCouplingParams& p, const CouplingMask& update,
                                  std::span<double> x) {
  check_conv_params(p, x.size());
  Vector flat;
  coupling_forward(single_conv(p), conv_params_flat(p, flat), update.complement(), x);
}

void masked_conv_coupling_inverse(const ConvCouplingParams& p, const CouplingMask& update,
                                  std::span<double> y) {
  check_conv_params(p, y.size());
  Vector flat;
  coupling_inverse(single_conv(p), conv_params_flat(p, flat), update.complement(), y);
}

// ---------------------------------------------------------------------------
// Layers

namespace detail {

class FlowLayer {
 public:
  virtual ~FlowLayer() = default;
  virtual void initialize(std::span<double> theta, double scale,
                          std::mt19937_64& rng) const = 0;
  virtual void forward(std::span<const double> theta, std::span<double> x) const = 0;
  virtual void inverse(std::span<const double> theta, std::span<double> y) const = 0;
  /// v <- D psi(x)[v], then x <- psi(x).
  virtual void forward_tangent(std::span<const double> theta, std::span<double> x,
                               std::span<double> v) const = 0;
  /// w <- D psi^{-1}(y)[w], then y <- psi^{-1}(y).
  virtual void inverse_tangent(std::span<const double> theta, std::span<double> y,
                               std::span<double> w) const = 0;
  virtual double log_abs_det(std::span<const double>) const { return 0.0; }
  /// g: output cotangent in, input cotangent out.
  virtual void backward(std::span<const double> theta, std::span<const double> x,
                        std::span<double> g, double grad_logdet,
                        std::span<double> grad_theta) const = 0;
  virtual bool is_actnorm() const { return false; }
};

namespace {

class ActNormLayer final : public FlowLayer {
 public:
  ActNormLayer(std::size_t offset, std::size_t channels, std::size_t spatial)
      : offset_(offset), channels_(channels), spatial_(spatial) {}

  std::span<const double> log_scale(std::span<const double> t) const {
    return t.subspan(offset_, channels_);
  }
  std::span<const double> bias(std::span<const double> t) const {
    return t.subspan(offset_ + channels_, channels_);
  }
  std::size_t offset() const { return offset_; }
  std::size_t channels() const { return channels_; }
  std::size_t spatial() const { return spatial_; }

  void initialize(std::span<double> theta, double, std::mt19937_64&) const override {
    std::fill_n(theta.begin() + static_cast<std::ptrdiff_t>(offset_), 2 * channels_, 0.0);
  }
  void forward(std::span<const double> t, std::span<double> x) const override {
    actnorm_forward(log_scale(t), bias(t), spatial_, x);
  }
  void inverse(std::span<const double> t, std::span<double> y) const override {
    actnorm_inverse(log_scale(t), bias(t), spatial_, y);
  }
  void forward_tangent(std::span<const double> t, std::span<double> x,
                       std::span<double> v) const override {
    auto ls = log_scale(t);
    for (std::size_t c = 0; c < channels_; ++c) {
      const double s = std::exp(ls[c]);
      for (std::size_t k = 0; k < spatial_; ++k) v[c * spatial_ + k] *= s;
    }
    forward(t, x);
  }
  void inverse_tangent(std::span<const double> t, std::span<double> y,
                       std::span<double> w) const override {
    auto ls = log_scale(t);
    for (std::size_t c = 0; c < channels_; ++c) {
      const double inv = std::exp(-ls[c]);
      for (std::size_t k = 0; k < spatial_; ++k) w[c * spatial_ + k] *= inv;
    }
    inverse(t, y);
  }
  double log_abs_det(std::span<const double> t) const override {
    return actnorm_logdet(log_scale(t), spatial_);
  }
  void backward(std::span<const double> t, std::span<const double> x, std::span<double> g,
                double grad_logdet, std::span<double> grad) const override {
    auto ls = log_scale(t);
    for (std::size_t c = 0; c < channels_; ++c) {
      const double s = std::exp(ls[c]);
      double gs = 0.0, gb = 0.0;
      for (std::size_t k = 0; k < spatial_; ++k) {
        const std::size_t i = c * spatial_ + k;
        gs += g[i] * s * x[i];
        gb += g[i];
        g[i] *= s;
      }
      grad[offset_ + c] += gs + grad_logdet * static_cast<double>(spatial_);
      grad[offset_ + channels_ + c] += gb;
    }
  }
  bool is_actnorm() const override { return true; }

 private:
  std::size_t offset_, channels_, spatial_;
};

class HouseholderLayer final : public FlowLayer {
 public:
  HouseholderLayer(std::size_t offset, std::size_t dim, std::size_t count)
      : offset_(offset), dim_(dim), count_(count) {}

  std::span<const double> vectors(std::span<const double> t) const {
    return t.subspan(offset_, dim_ * count_);
  }
  void initialize(std::span<double> theta, double, std::mt19937_64& rng) const override {
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t r = 0; r < count_; ++r) {
      auto v = theta.subspan(offset_ + r * dim_, dim_);
      double len = 0.0;
      while (len < 1e-8) {
        for (double& e : v) e = n(rng);
        len = norm(v);
      }
      for (double& e : v) e /= len;
    }
  }
  void forward(std::span<const double> t, std::span<double> x) const override {
    householder_apply(vectors(t), x);
  }
  void inverse(std::span<const double> t, std::span<double> y) const override {
    householder_apply_inverse(vectors(t), y);
  }
  void forward_tangent(std::span<const double> t, std::span<double> x,
                       std::span<double> v) const override {
    householder_apply(vectors(t), v);
    householder_apply(vectors(t), x);
  }
  void inverse_tangent(std::span<const double> t, std::span<double> y,
                       std::span<double> w) const override {
    householder_apply_inverse(vectors(t), w);
    householder_apply_inverse(vectors(t), y);
  }
  void backward(std::span<const double> t, std::span<const double> x, std::span<double> g,
                double, std::span<double> grad) const override {
    householder_backward(vectors(t), x, g, grad.subspan(offset_, dim_ * count_));
  }

 private:
  std::size_t offset_, dim_, count_;
};

class CouplingLayer final : public FlowLayer {
 public:
  CouplingLayer(std::size_t offset, std::shared_ptr<const CouplingNet> net, CouplingMask keep)
      : offset_(offset), net_(std::move(net)), keep_(keep), mask_(keep.indicator()) {}

  std::span<const double> net_params(std::span<const double> t) const {
    return t.subspan(offset_, net_->param_count());
  }
  void initialize(std::span<double> theta, double scale,
                  std::mt19937_64& rng) const override {
    net_->initialize(theta.subspan(offset_, net_->param_count()), scale, rng);
  }
  void forward(std::span<const double> t, std::span<double> x) const override {
    shift(t, x, +1.0);
  }
  void inverse(std::span<const double> t, std::span<double> y) const override {
    shift(t, y, -1.0);
  }
  void forward_tangent(std::span<const double> t, std::span<double> x,
                       std::span<double> v) const override {
    tangent(t, x, v, +1.0);
  }
  void inverse_tangent(std::span<const double> t, std::span<double> y,
                       std::span<double> w) const override {
    tangent(t, y, w, -1.0);
  }
  void backward(std::span<const double> t, std::span<const double> x, std::span<double> g,
                double, std::span<double> grad) const override {
    const Vector u = masked(x, mask_);
    Vector gout(g.size(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!mask_[i]) {
        gout[i] = g[i];
        any = any || g[i] != 0.0;
      }
    }
    if (!any) return;
    Vector gu(g.size(), 0.0);
    net_->vjp(net_params(t), u, gout, gu, grad.subspan(offset_, net_->param_count()));
    for (std::size_t i = 0; i < g.size(); ++i)
      if (mask_[i]) g[i] += gu[i];
  }

 private:
  void shift(std::span<const double> t, std::span<double> x, double sign) const {
    const Vector u = masked(x, mask_);
    Vector f(x.size());
    net_->eval(net_params(t), u, f);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!mask_[i]) x[i] += sign * f[i];
  }
  void tangent(std::span<const double> t, std::span<double> x, std::span<double> v,
               double sign) const {
    const Vector u = masked(x, mask_);
    const Vector du = masked(v, mask_);
    Vector df(x.size());
    net_->jvp(net_params(t), u, du, df);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!mask_[i]) v[i] += sign * df[i];
    shift(t, x, sign);
  }

  std::size_t offset_;
  std::shared_ptr<const CouplingNet> net_;
  CouplingMask keep_;
  std::vector<std::uint8_t> mask_;
};

}  // namespace
}  // namespace detail

// ---------------------------------------------------------------------------
// FlowModel

FlowModel::FlowModel(FlowConfig config) : config_(std::move(config)) {
  config_.validate();
  actnorm_initialized_ = !config_.actnorm_data_init;
  const auto order = config_.activation_order;
  for (int b = 0; b < config_.blocks; ++b) {
    const std::string prefix = "block" + std::to_string(b) + ".";
    const int parity = b % 2;
    if (config_.kind == DataKind::Vector) {
      const std::size_t d = config_.dim;
      const std::size_t an = params_.append(prefix + "actnorm", 2 * d);
      layers_.push_back(std::make_shared<detail::ActNormLayer>(an, d, 1));
      const auto nh = static_cast<std::size_t>(config_.householder_reflections);
      if (nh > 0) {
        const std::size_t hh = params_.append(prefix + "householder", nh * d);
        layers_.push_back(std::make_shared<detail::HouseholderLayer>(hh, d, nh));
      }
      std::shared_ptr<const CouplingNet> net;
      if (config_.coupling == CouplingNetKind::FixedFilter)
        net = std::make_shared<FixedFilterNet>(d, config_.fixed_filter, order);
      else
        net = std::make_shared<FeedForwardNet>(d, config_.hidden, order);
      const std::size_t cp = params_.append(prefix + "coupling", net->param_count());
      layers_.push_back(
          std::make_shared<detail::CouplingLayer>(cp, net, CouplingMask::vector(d, parity)));
    } else {
      const ImageShape& s = config_.image;
      const CouplingMask keep = CouplingMask::checkerboard(s, parity);
      const std::size_t an = params_.append(prefix + "actnorm", 2 * s.channels);
      layers_.push_back(std::make_shared<detail::ActNormLayer>(an, s.channels, s.spatial()));
      auto lin = std::make_shared<ConvNet>(s.height, s.width,
                                           std::vector<std::size_t>{s.channels, s.channels},
                                           config_.linear_kernel_size, order);
      // First masked conv updates J, the second its complement.
      const std::size_t ca = params_.append(prefix + "conv_a", lin->param_count());
      layers_.push_back(std::make_shared<detail::CouplingLayer>(ca, lin, keep.complement()));
      const std::size_t cb = params_.append(prefix + "conv_b", lin->param_count());
      layers_.push_back(std::make_shared<detail::CouplingLayer>(cb, lin, keep));
      std::vector<std::size_t> channels{s.channels};
      channels.insert(channels.end(), config_.hidden.begin(), config_.hidden.end());
      channels.push_back(s.channels);
      auto net = std::make_shared<ConvNet>(s.height, s.width, channels, config_.kernel_size,
                                           order);
      const std::size_t cp = params_.append(prefix + "coupling", net->param_count());
      layers_.push_back(std::make_shared<detail::CouplingLayer>(cp, net, keep));
    }
  }
}

std::optional<ImageShape> FlowModel::image_shape() const {
  if (config_.kind == DataKind::Image) return config_.image;
  return std::nullopt;
}

void FlowModel::require_initialized() const {
  if (!actnorm_initialized_)
    throw StateError("flow model: actnorm layers are not initialized");
}

Vector FlowModel::do_forward(std::span<const double> x) const {
  require_initialized();
  Vector y(x.begin(), x.end());
  for (const auto& l : layers_) l->forward(params_.values(), y);
  return y;
}

Vector FlowModel::do_inverse(std::span<const double> y) const {
  require_initialized();
  Vector x(y.begin(), y.end());
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    (*it)->inverse(params_.values(), x);
  return x;
}

Vector FlowModel::do_jvp(std::span<const double> x, std::span<const double> v) const {
  require_initialized();
  Vector p(x.begin(), x.end());
  Vector t(v.begin(), v.end());
  for (const auto& l : layers_) l->forward_tangent(params_.values(), p, t);
  return t;
}

Vector FlowModel::do_inverse_jvp(std::span<const double> y,
                                 std::span<const double> w) const {
  require_initialized();
  Vector p(y.begin(), y.end());
  Vector t(w.begin(), w.end());
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    (*it)->inverse_tangent(params_.values(), p, t);
  return t;
}

double FlowModel::do_log_abs_det(std::span<const double>) const {
  require_initialized();
  double s = 0.0;
  for (const auto& l : layers_) s += l->log_abs_det(params_.values());
  return s;
}

FlowTape FlowModel::record(std::span<const double> x) const {
  if (x.size() != dim()) throw DomainError("flow record: dimension mismatch");
  require_initialized();
  FlowTape tape;
  tape.layer_inputs.reserve(layers_.size());
  Vector y(x.begin(), x.end());
  for (const auto& l : layers_) {
    tape.layer_inputs.push_back(y);
    l->forward(params_.values(), y);
    tape.log_abs_det += l->log_abs_det(params_.values());
  }
  tape.output = std::move(y);
  return tape;
}

FlowGradient FlowModel::backward(const FlowTape& tape, std::span<const double> grad_out,
                                 double grad_logdet) const {
  assert(tape.layer_inputs.size() == layers_.size());
  FlowGradient g;
  g.params.assign(params_.size(), 0.0);
  g.input.assign(grad_out.begin(), grad_out.end());
  for (std::size_t l = layers_.size(); l-- > 0;)
    layers_[l]->backward(params_.values(), tape.layer_inputs[l], g.input, grad_logdet,
                         g.params);
  return g;
}

void FlowModel::initialize_actnorm(const Matrix& batch) {
  if (batch.rows() != dim() || batch.cols() == 0)
    throw DomainError("actnorm init: batch shape mismatch");
  Matrix cur = batch;
  const double n = static_cast<double>(batch.cols());
  for (const auto& layer : layers_) {
    if (layer->is_actnorm()) {
      const auto& an = static_cast<const detail::ActNormLayer&>(*layer);
      auto theta = params_.values();
      const std::size_t sp = an.spatial();
      for (std::size_t c = 0; c < an.channels(); ++c) {
        double mean = 0.0;
        for (std::size_t j = 0; j < cur.cols(); ++j)
          for (std::size_t k = 0; k < sp; ++k) mean += cur(c * sp + k, j);
        mean /= n * static_cast<double>(sp);
        double var = 0.0;
        for (std::size_t j = 0; j < cur.cols(); ++j)
          for (std::size_t k = 0; k < sp; ++k) {
            const double dlt = cur(c * sp + k, j) - mean;
            var += dlt * dlt;
          }
        var /= n * static_cast<double>(sp);
        const double sd = std::sqrt(var);
        const double ls = sd > 1e-12 ? -std::log(sd) : 0.0;
        theta[an.offset() + c] = ls;
        theta[an.offset() + an.channels() + c] = -mean * std::exp(ls);
      }
    }
    for (std::size_t j = 0; j < cur.cols(); ++j) layer->forward(params_.values(), cur.col(j));
  }
  actnorm_initialized_ = true;
}

void FlowModel::initialize_parameters(std::uint64_t seed) {
  seed_ = seed;
  std::mt19937_64 rng(seed);
  auto theta = params_.values();
  for (const auto& l : layers_) l->initialize(theta, config_.init_scale, rng);
  actnorm_initialized_ = !config_.actnorm_data_init;
}

FlowModel build_flow(const FlowConfig& config, std::uint64_t seed) {
  FlowModel model(config);
  model.initialize_parameters(seed);
  return model;
}

FlowGradient flow_vjp(const FlowModel& model, std::span<const double> x,
                      std::span<const double> grad_out, double grad_logdet) {
  if (grad_out.size() != model.dim()) throw DomainError("flow_vjp: cotangent size");
  return model.backward(model.record(x), grad_out, grad_logdet);
}

}  // namespace isogeo
