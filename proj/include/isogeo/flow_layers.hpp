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

#pragma once

// Building blocks of the constant-determinant flow: learnable tanh-polynomial
// activations, Householder reflections, activation normalization, masks and
// zero-padded convolutions. Functions here are stateless and operate on
// spans; FlowModel wires them into layers over a flat parameter vector.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "isogeo/diffeomorphism.hpp"
#include "isogeo/linalg.hpp"

namespace isogeo {

// ---------------------------------------------------------------------------
// Activation sigma(x) = sum_{k=1..N} a_k tanh(x)^k

double tanh_poly(std::span<const double> coeffs, double x);
double tanh_poly_derivative(std::span<const double> coeffs, double x);

/// Value and derivative together, sharing one tanh evaluation.
struct TanhPolyEval {
  double value;
  double derivative;
};
TanhPolyEval tanh_poly_eval(std::span<const double> coeffs, double x);

// ---------------------------------------------------------------------------
// Householder stack H_K ... H_1 with H = I - 2 v v^T / |v|^2.
// `vectors` holds K consecutive vectors of length x.size().

void householder_apply(std::span<const double> vectors, std::span<double> x);
void householder_apply_inverse(std::span<const double> vectors, std::span<double> x);

/// Reverse pass through the stack. `x` is the stack input, `g` the output
/// cotangent (replaced by the input cotangent); gradients with respect to the
/// vectors are accumulated into `grad_vectors`.
void householder_backward(std::span<const double> vectors, std::span<const double> x,
                          std::span<double> g, std::span<double> grad_vectors);

// ---------------------------------------------------------------------------
// ActNorm y = exp(log_scale[c]) * x + bias[c], channel c covering `spatial`
// consecutive entries (spatial = 1 for vector data).

void actnorm_forward(std::span<const double> log_scale, std::span<const double> bias,
                     std::size_t spatial, std::span<double> x);
void actnorm_inverse(std::span<const double> log_scale, std::span<const double> bias,
                     std::size_t spatial, std::span<double> y);
double actnorm_logdet(std::span<const double> log_scale, std::size_t spatial);

// ---------------------------------------------------------------------------
// Masks. J holds the coordinates that a coupling keeps fixed and reads from.

enum class MaskLayout { Vector, Checkerboard };

/// Index set J with its binary indicator m_J.
///   Vector:       J = { j : j mod 2 == parity }
///   Checkerboard: J = { (c, h, w) : (h + w) mod 2 == parity }, all channels
struct CouplingMask {
  MaskLayout layout = MaskLayout::Vector;
  std::size_t dim = 0;
  ImageShape shape{};
  int parity = 0;

  static CouplingMask vector(std::size_t dim, int parity);
  static CouplingMask checkerboard(ImageShape shape, int parity);

  bool contains(std::size_t index) const;
  /// m_J as 0/1 values.
  std::vector<std::uint8_t> indicator() const;
  CouplingMask complement() const;
};

// ---------------------------------------------------------------------------
// Zero-padded "same" 2D cross-correlation with odd kernel size. Layouts:
// input (cin, h, w), kernel (cout, cin, k, k), output (cout, h, w).

struct ConvShape {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t height;
  std::size_t width;
  std::size_t kernel;

  std::size_t kernel_size() const { return out_channels * in_channels * kernel * kernel; }
};

/// out = conv(in) + bias (overwrites out).
void conv2d_forward(const ConvShape& s, std::span<const double> in,
                    std::span<const double> kernel, std::span<const double> bias,
                    std::span<double> out);
/// out = conv(in) without bias, linear in `in` (used for tangents).
void conv2d_linear(const ConvShape& s, std::span<const double> in,
                   std::span<const double> kernel, std::span<double> out);
/// grad_in += conv^T(grad_out).
void conv2d_backward_input(const ConvShape& s, std::span<const double> grad_out,
                           std::span<const double> kernel, std::span<double> grad_in);
/// grad_kernel += dL/dK, grad_bias += dL/db.
void conv2d_backward_params(const ConvShape& s, std::span<const double> in,
                            std::span<const double> grad_out,
                            std::span<double> grad_kernel, std::span<double> grad_bias);

/// Zero-padded 1D correlation with an odd fixed filter:
/// out[j] = sum_t taps[t] * in[j + t - (taps.size() - 1) / 2].
void fixed_filter_apply(std::span<const double> taps, std::span<const double> in,
                        std::span<double> out);
/// Adjoint of fixed_filter_apply, accumulated into grad_in.
void fixed_filter_adjoint(std::span<const double> taps, std::span<const double> grad_out,
                          std::span<double> grad_in);

}  // namespace isogeo
