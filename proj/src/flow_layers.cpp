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

#include "isogeo/flow_layers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace isogeo {

TanhPolyEval tanh_poly_eval(std::span<const double> coeffs, double x) {
  const double t = std::tanh(x);
  double value = 0.0;
  double dt = 0.0;
  double power = 1.0;  // t^(k-1)
  for (std::size_t k = 1; k <= coeffs.size(); ++k) {
    dt += static_cast<double>(k) * coeffs[k - 1] * power;
    power *= t;
    value += coeffs[k - 1] * power;
  }
  return {value, dt * (1.0 - t * t)};
}

double tanh_poly(std::span<const double> coeffs, double x) {
  return tanh_poly_eval(coeffs, x).value;
}

double tanh_poly_derivative(std::span<const double> coeffs, double x) {
  return tanh_poly_eval(coeffs, x).derivative;
}

namespace {

void reflect(std::span<const double> v, std::span<double> x) {
  const double s = dot(v, v);
  if (s == 0.0) return;
  const double f = 2.0 * dot(v, x) / s;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= f * v[i];
}

}  // namespace

void householder_apply(std::span<const double> vectors, std::span<double> x) {
  const std::size_t d = x.size();
  assert(d > 0 && vectors.size() % d == 0);
  for (std::size_t r = 0; r < vectors.size() / d; ++r) reflect(vectors.subspan(r * d, d), x);
}

void householder_apply_inverse(std::span<const double> vectors, std::span<double> x) {
  const std::size_t d = x.size();
  assert(d > 0 && vectors.size() % d == 0);
  for (std::size_t r = vectors.size() / d; r-- > 0;) reflect(vectors.subspan(r * d, d), x);
}

void householder_backward(std::span<const double> vectors, std::span<const double> x,
                          std::span<double> g, std::span<double> grad_vectors) {
  const std::size_t d = x.size();
  const std::size_t count = vectors.size() / d;
  // Inputs to each reflection.
  std::vector<double> inputs(count * d);
  Vector cur(x.begin(), x.end());
  for (std::size_t r = 0; r < count; ++r) {
    std::copy(cur.begin(), cur.end(), inputs.begin() + static_cast<std::ptrdiff_t>(r * d));
    reflect(vectors.subspan(r * d, d), cur);
  }
  for (std::size_t r = count; r-- > 0;) {
    auto v = vectors.subspan(r * d, d);
    std::span<const double> xin(inputs.data() + r * d, d);
    const double s = dot(v, v);
    if (s == 0.0) continue;
    const double p = dot(v, xin);
    const double q = dot(v, g);
    auto gv = grad_vectors.subspan(r * d, d);
    for (std::size_t i = 0; i < d; ++i)
      gv[i] += -2.0 * (q * xin[i] / s + p * g[i] / s - 2.0 * p * q * v[i] / (s * s));
    // H is symmetric.
    const double f = 2.0 * q / s;
    for (std::size_t i = 0; i < d; ++i) g[i] -= f * v[i];
  }
}

void actnorm_forward(std::span<const double> log_scale, std::span<const double> bias,
                     std::size_t spatial, std::span<double> x) {
  assert(x.size() == log_scale.size() * spatial);
  for (std::size_t c = 0; c < log_scale.size(); ++c) {
    const double s = std::exp(log_scale[c]);
    for (std::size_t k = 0; k < spatial; ++k) {
      double& v = x[c * spatial + k];
      v = s * v + bias[c];
    }
  }
}

void actnorm_inverse(std::span<const double> log_scale, std::span<const double> bias,
                     std::size_t spatial, std::span<double> y) {
  assert(y.size() == log_scale.size() * spatial);
  for (std::size_t c = 0; c < log_scale.size(); ++c) {
    const double inv = std::exp(-log_scale[c]);
    for (std::size_t k = 0; k < spatial; ++k) {
      double& v = y[c * spatial + k];
      v = (v - bias[c]) * inv;
    }
  }
}

double actnorm_logdet(std::span<const double> log_scale, std::size_t spatial) {
  double s = 0.0;
  for (double l : log_scale) s += l;
  return s * static_cast<double>(spatial);
}

CouplingMask CouplingMask::vector(std::size_t dim, int parity) {
  CouplingMask m;
  m.layout = MaskLayout::Vector;
  m.dim = dim;
  m.parity = parity & 1;
  return m;
}

CouplingMask CouplingMask::checkerboard(ImageShape shape, int parity) {
  CouplingMask m;
  m.layout = MaskLayout::Checkerboard;
  m.dim = shape.size();
  m.shape = shape;
  m.parity = parity & 1;
  return m;
}

bool CouplingMask::contains(std::size_t index) const {
  if (layout == MaskLayout::Vector) return static_cast<int>(index % 2) == parity;
  const std::size_t pix = index % shape.spatial();
  const std::size_t h = pix / shape.width;
  const std::size_t w = pix % shape.width;
  return static_cast<int>((h + w) % 2) == parity;
}

std::vector<std::uint8_t> CouplingMask::indicator() const {
  std::vector<std::uint8_t> m(dim);
  for (std::size_t i = 0; i < dim; ++i) m[i] = contains(i) ? 1 : 0;
  return m;
}

CouplingMask CouplingMask::complement() const {
  CouplingMask m = *this;
  m.parity = 1 - parity;
  return m;
}

namespace {

// Valid output range [lo, hi) along one axis for offset `off` and extent `n`.
inline void valid_range(std::ptrdiff_t off, std::size_t n, std::size_t& lo, std::size_t& hi) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
  lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -off));
  hi = static_cast<std::size_t>(std::min<std::ptrdiff_t>(sn, sn - off));
  if (hi < lo) hi = lo;
}

}  // namespace

void conv2d_linear(const ConvShape& s, std::span<const double> in,
                   std::span<const double> kernel, std::span<double> out) {
  const std::size_t hw = s.height * s.width;
  assert(in.size() == s.in_channels * hw && out.size() == s.out_channels * hw);
  assert(kernel.size() == s.kernel_size());
  std::fill(out.begin(), out.end(), 0.0);
  const auto pad = static_cast<std::ptrdiff_t>((s.kernel - 1) / 2);
  for (std::size_t o = 0; o < s.out_channels; ++o) {
    double* dst = out.data() + o * hw;
    for (std::size_t i = 0; i < s.in_channels; ++i) {
      const double* src = in.data() + i * hw;
      const double* kk = kernel.data() + (o * s.in_channels + i) * s.kernel * s.kernel;
      for (std::size_t ky = 0; ky < s.kernel; ++ky) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        std::size_t r0, r1;
        valid_range(dy, s.height, r0, r1);
        for (std::size_t kx = 0; kx < s.kernel; ++kx) {
          const double wgt = kk[ky * s.kernel + kx];
          if (wgt == 0.0) continue;
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
          std::size_t c0, c1;
          valid_range(dx, s.width, c0, c1);
          for (std::size_t r = r0; r < r1; ++r) {
            double* orow = dst + r * s.width;
            const double* irow =
                src + static_cast<std::ptrdiff_t>(r) * static_cast<std::ptrdiff_t>(s.width) +
                dy * static_cast<std::ptrdiff_t>(s.width) + dx;
            for (std::size_t c = c0; c < c1; ++c) orow[c] += wgt * irow[c];
          }
        }
      }
    }
  }
}

void conv2d_forward(const ConvShape& s, std::span<const double> in,
                    std::span<const double> kernel, std::span<const double> bias,
                    std::span<double> out) {
  conv2d_linear(s, in, kernel, out);
  const std::size_t hw = s.height * s.width;
  for (std::size_t o = 0; o < s.out_channels; ++o)
    for (std::size_t k = 0; k < hw; ++k) out[o * hw + k] += bias[o];
}

void conv2d_backward_input(const ConvShape& s, std::span<const double> grad_out,
                           std::span<const double> kernel, std::span<double> grad_in) {
  const std::size_t hw = s.height * s.width;
  const auto pad = static_cast<std::ptrdiff_t>((s.kernel - 1) / 2);
  for (std::size_t o = 0; o < s.out_channels; ++o) {
    const double* go = grad_out.data() + o * hw;
    for (std::size_t i = 0; i < s.in_channels; ++i) {
      double* gi = grad_in.data() + i * hw;
      const double* kk = kernel.data() + (o * s.in_channels + i) * s.kernel * s.kernel;
      for (std::size_t ky = 0; ky < s.kernel; ++ky) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        std::size_t r0, r1;
        valid_range(dy, s.height, r0, r1);
        for (std::size_t kx = 0; kx < s.kernel; ++kx) {
          const double wgt = kk[ky * s.kernel + kx];
          if (wgt == 0.0) continue;
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
          std::size_t c0, c1;
          valid_range(dx, s.width, c0, c1);
          for (std::size_t r = r0; r < r1; ++r) {
            const double* grow = go + r * s.width;
            double* irow = gi + static_cast<std::ptrdiff_t>(r) * static_cast<std::ptrdiff_t>(s.width) +
                           dy * static_cast<std::ptrdiff_t>(s.width) + dx;
            for (std::size_t c = c0; c < c1; ++c) irow[c] += wgt * grow[c];
          }
        }
      }
    }
  }
}

void conv2d_backward_params(const ConvShape& s, std::span<const double> in,
                            std::span<const double> grad_out,
                            std::span<double> grad_kernel, std::span<double> grad_bias) {
  const std::size_t hw = s.height * s.width;
  const auto pad = static_cast<std::ptrdiff_t>((s.kernel - 1) / 2);
  for (std::size_t o = 0; o < s.out_channels; ++o) {
    const double* go = grad_out.data() + o * hw;
    double gb = 0.0;
    for (std::size_t k = 0; k < hw; ++k) gb += go[k];
    grad_bias[o] += gb;
    for (std::size_t i = 0; i < s.in_channels; ++i) {
      const double* src = in.data() + i * hw;
      double* gk = grad_kernel.data() + (o * s.in_channels + i) * s.kernel * s.kernel;
      for (std::size_t ky = 0; ky < s.kernel; ++ky) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        std::size_t r0, r1;
        valid_range(dy, s.height, r0, r1);
        for (std::size_t kx = 0; kx < s.kernel; ++kx) {
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
          std::size_t c0, c1;
          valid_range(dx, s.width, c0, c1);
          double acc = 0.0;
          for (std::size_t r = r0; r < r1; ++r) {
            const double* grow = go + r * s.width;
            const double* irow =
                src + static_cast<std::ptrdiff_t>(r) * static_cast<std::ptrdiff_t>(s.width) +
                dy * static_cast<std::ptrdiff_t>(s.width) + dx;
            for (std::size_t c = c0; c < c1; ++c) acc += grow[c] * irow[c];
          }
          gk[ky * s.kernel + kx] += acc;
        }
      }
    }
  }
}

void fixed_filter_apply(std::span<const double> taps, std::span<const double> in,
                        std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
  const auto half = static_cast<std::ptrdiff_t>((taps.size() - 1) / 2);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t t = 0; t < taps.size(); ++t) {
      const std::ptrdiff_t src = j + static_cast<std::ptrdiff_t>(t) - half;
      if (src >= 0 && src < n) acc += taps[t] * in[static_cast<std::size_t>(src)];
    }
    out[static_cast<std::size_t>(j)] = acc;
  }
}

void fixed_filter_adjoint(std::span<const double> taps, std::span<const double> grad_out,
                          std::span<double> grad_in) {
  const auto n = static_cast<std::ptrdiff_t>(grad_out.size());
  const auto half = static_cast<std::ptrdiff_t>((taps.size() - 1) / 2);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    for (std::size_t t = 0; t < taps.size(); ++t) {
      const std::ptrdiff_t src = j + static_cast<std::ptrdiff_t>(t) - half;
      if (src >= 0 && src < n)
        grad_in[static_cast<std::size_t>(src)] += taps[t] * grad_out[static_cast<std::size_t>(j)];
    }
  }
}

}  // namespace isogeo
