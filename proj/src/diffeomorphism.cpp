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

#include "isogeo/diffeomorphism.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "isogeo/errors.hpp"

namespace isogeo {

void Diffeomorphism::check_point(std::span<const double> x, const char* what) const {
  if (x.size() != dim()) {
    throw DomainError(std::string(what) + ": expected dimension " +
                      std::to_string(dim()) + ", got " + std::to_string(x.size()));
  }
  if (!all_finite(x)) throw DomainError(std::string(what) + ": non-finite input");
}

Vector Diffeomorphism::forward(std::span<const double> x) const {
  check_point(x, "forward");
  return do_forward(x);
}

Vector Diffeomorphism::inverse(std::span<const double> y) const {
  check_point(y, "inverse");
  return do_inverse(y);
}

Vector Diffeomorphism::jvp(std::span<const double> x, std::span<const double> v) const {
  check_point(x, "jvp");
  check_point(v, "jvp direction");
  return do_jvp(x, v);
}

Vector Diffeomorphism::inverse_jvp(std::span<const double> y,
                                   std::span<const double> w) const {
  check_point(y, "inverse_jvp");
  check_point(w, "inverse_jvp direction");
  return do_inverse_jvp(y, w);
}

double Diffeomorphism::log_abs_det(std::span<const double> x) const {
  check_point(x, "log_abs_det");
  return do_log_abs_det(x);
}

// Identity

Vector IdentityDiffeo::do_forward(std::span<const double> x) const {
  return {x.begin(), x.end()};
}
Vector IdentityDiffeo::do_inverse(std::span<const double> y) const {
  return {y.begin(), y.end()};
}
Vector IdentityDiffeo::do_jvp(std::span<const double>, std::span<const double> v) const {
  return {v.begin(), v.end()};
}
Vector IdentityDiffeo::do_inverse_jvp(std::span<const double>,
                                      std::span<const double> w) const {
  return {w.begin(), w.end()};
}
double IdentityDiffeo::do_log_abs_det(std::span<const double>) const { return 0.0; }

// Affine

AffineLinearDiffeo::AffineLinearDiffeo(Matrix a, Vector b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols() || a_.rows() != b_.size())
    throw ConfigError("affine map: inconsistent shapes");
  a_inv_ = isogeo::inverse(a_);
  log_abs_det_ = log_abs_determinant(a_);
}

AffineLinearDiffeo::AffineLinearDiffeo(Matrix a)
    : AffineLinearDiffeo(a, Vector(a.rows(), 0.0)) {}

Vector AffineLinearDiffeo::do_forward(std::span<const double> x) const {
  return add(matvec(a_, x), b_);
}
Vector AffineLinearDiffeo::do_inverse(std::span<const double> y) const {
  return matvec(a_inv_, sub(y, b_));
}
Vector AffineLinearDiffeo::do_jvp(std::span<const double>,
                                  std::span<const double> v) const {
  return matvec(a_, v);
}
Vector AffineLinearDiffeo::do_inverse_jvp(std::span<const double>,
                                          std::span<const double> w) const {
  return matvec(a_inv_, w);
}
double AffineLinearDiffeo::do_log_abs_det(std::span<const double>) const {
  return log_abs_det_;
}

// Modeled double Gaussian

namespace {
constexpr double kR = ModeledDoubleGaussian::kRot;

double sech2(double a) {
  const double c = std::cosh(a);
  return 1.0 / (c * c);
}

// log cosh without overflow.
double log_cosh(double a) {
  const double b = std::abs(a);
  return b + std::log1p(std::exp(-2.0 * b)) - std::numbers::ln2;
}
}  // namespace

double ModeledDoubleGaussian::h(double s) {
  return std::abs(s) <= 1.0 ? 0.5 * s * s + 0.5 : std::abs(s);
}

double ModeledDoubleGaussian::h_prime(double s) {
  return std::abs(s) <= 1.0 ? s : std::copysign(1.0, s);
}

Vector ModeledDoubleGaussian::do_forward(std::span<const double> x) const {
  const double y1 = kR * (x[0] - x[1]);
  const double y2 = kR * (x[0] + x[1]);
  return {y1 - h(y2), std::tanh(0.5 * y2)};
}

Vector ModeledDoubleGaussian::do_inverse(std::span<const double> z) const {
  if (!(std::abs(z[1]) < 1.0)) {
    throw OutOfImageError("modeled diffeomorphism: second latent coordinate " +
                          std::to_string(z[1]) + " outside (-1, 1)");
  }
  const double y2 = 2.0 * std::atanh(z[1]);
  const double y1 = z[0] + h(y2);
  return {kR * (y1 + y2), kR * (y2 - y1)};
}

Vector ModeledDoubleGaussian::do_jvp(std::span<const double> x,
                                     std::span<const double> v) const {
  const double y2 = kR * (x[0] + x[1]);
  const double dy1 = kR * (v[0] - v[1]);
  const double dy2 = kR * (v[0] + v[1]);
  return {dy1 - h_prime(y2) * dy2, 0.5 * sech2(0.5 * y2) * dy2};
}

Vector ModeledDoubleGaussian::do_inverse_jvp(std::span<const double> z,
                                             std::span<const double> w) const {
  if (!(std::abs(z[1]) < 1.0)) {
    throw OutOfImageError("modeled diffeomorphism: inverse differential outside image");
  }
  const double y2 = 2.0 * std::atanh(z[1]);
  const double dy2 = 2.0 * w[1] / (1.0 - z[1] * z[1]);
  const double dy1 = w[0] + h_prime(y2) * dy2;
  return {kR * (dy1 + dy2), kR * (dy2 - dy1)};
}

double ModeledDoubleGaussian::do_log_abs_det(std::span<const double> x) const {
  const double y2 = kR * (x[0] + x[1]);
  return -std::numbers::ln2 - 2.0 * log_cosh(0.5 * y2);
}

// Quadratic shear

Vector QuadraticShear::do_forward(std::span<const double> x) const {
  return {x[0], x[1] + x[0] * x[0]};
}
Vector QuadraticShear::do_inverse(std::span<const double> y) const {
  return {y[0], y[1] - y[0] * y[0]};
}
Vector QuadraticShear::do_jvp(std::span<const double> x,
                              std::span<const double> v) const {
  return {v[0], v[1] + 2.0 * x[0] * v[0]};
}
Vector QuadraticShear::do_inverse_jvp(std::span<const double> y,
                                      std::span<const double> w) const {
  return {w[0], w[1] - 2.0 * y[0] * w[0]};
}
double QuadraticShear::do_log_abs_det(std::span<const double>) const { return 0.0; }

}  // namespace isogeo
