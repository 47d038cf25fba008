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

#include <cstddef>
#include <optional>
#include <span>

#include "isogeo/linalg.hpp"

namespace isogeo {

/// Channel-height-width layout tag for image data stored as flat vectors
/// (index = (c * height + h) * width + w).
struct ImageShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t size() const { return channels * height * width; }
  std::size_t spatial() const { return height * width; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// An invertible smooth map phi: R^d -> R^d with analytic differentials.
///
/// The public entry points validate dimensions and finiteness and then
/// dispatch to the variant-specific implementation. All queries are const
/// and safe to call concurrently.
class Diffeomorphism {
 public:
  virtual ~Diffeomorphism() = default;

  virtual std::size_t dim() const = 0;
  virtual std::optional<ImageShape> image_shape() const { return std::nullopt; }

  Vector forward(std::span<const double> x) const;
  /// Throws OutOfImageError when y is not in the image of forward().
  Vector inverse(std::span<const double> y) const;
  /// D_x phi [v].
  Vector jvp(std::span<const double> x, std::span<const double> v) const;
  /// D_y phi^{-1} [w], with y in the image.
  Vector inverse_jvp(std::span<const double> y, std::span<const double> w) const;
  /// log |det D_x phi|.
  double log_abs_det(std::span<const double> x) const;

 protected:
  virtual Vector do_forward(std::span<const double> x) const = 0;
  virtual Vector do_inverse(std::span<const double> y) const = 0;
  virtual Vector do_jvp(std::span<const double> x, std::span<const double> v) const = 0;
  virtual Vector do_inverse_jvp(std::span<const double> y,
                                std::span<const double> w) const = 0;
  virtual double do_log_abs_det(std::span<const double> x) const = 0;

 private:
  void check_point(std::span<const double> x, const char* what) const;
};

class IdentityDiffeo final : public Diffeomorphism {
 public:
  explicit IdentityDiffeo(std::size_t dim) : dim_(dim) {}
  std::size_t dim() const override { return dim_; }

 protected:
  Vector do_forward(std::span<const double> x) const override;
  Vector do_inverse(std::span<const double> y) const override;
  Vector do_jvp(std::span<const double> x, std::span<const double> v) const override;
  Vector do_inverse_jvp(std::span<const double> y,
                        std::span<const double> w) const override;
  double do_log_abs_det(std::span<const double> x) const override;

 private:
  std::size_t dim_;
};

/// x -> A x + b for an invertible square A.
class AffineLinearDiffeo final : public Diffeomorphism {
 public:
  AffineLinearDiffeo(Matrix a, Vector b);
  explicit AffineLinearDiffeo(Matrix a);
  std::size_t dim() const override { return a_.rows(); }
  const Matrix& matrix() const { return a_; }

 protected:
  Vector do_forward(std::span<const double> x) const override;
  Vector do_inverse(std::span<const double> y) const override;
  Vector do_jvp(std::span<const double> x, std::span<const double> v) const override;
  Vector do_inverse_jvp(std::span<const double> y,
                        std::span<const double> w) const override;
  double do_log_abs_det(std::span<const double> x) const override;

 private:
  Matrix a_;
  Matrix a_inv_;
  Vector b_;
  double log_abs_det_ = 0.0;
};

/// The hand-built pullback for a two-mode data set on a bent curve:
/// phi(x) = psi(R x) with R the 45 degree rotation and
/// psi(y) = (y1 - h(y2), tanh(y2 / 2)), where h(s) = s^2/2 + 1/2 for
/// |s| <= 1 and |s| otherwise.
///
/// The image is the strip R x (-1, 1); inverse() rejects anything else.
class ModeledDoubleGaussian final : public Diffeomorphism {
 public:
  std::size_t dim() const override { return 2; }

  static double h(double s);
  static double h_prime(double s);
  /// Rows of the rotation matrix R.
  static constexpr double kRot = 0.70710678118654752440;

 protected:
  Vector do_forward(std::span<const double> x) const override;
  Vector do_inverse(std::span<const double> y) const override;
  Vector do_jvp(std::span<const double> x, std::span<const double> v) const override;
  Vector do_inverse_jvp(std::span<const double> y,
                        std::span<const double> w) const override;
  double do_log_abs_det(std::span<const double> x) const override;
};

/// phi(x1, x2) = (x1, x2 + x1^2). A closed-form test diffeomorphism with
/// non-constant speed geodesics; inverse (y1, y2 - y1^2).
class QuadraticShear final : public Diffeomorphism {
 public:
  std::size_t dim() const override { return 2; }

 protected:
  Vector do_forward(std::span<const double> x) const override;
  Vector do_inverse(std::span<const double> y) const override;
  Vector do_jvp(std::span<const double> x, std::span<const double> v) const override;
  Vector do_inverse_jvp(std::span<const double> y,
                        std::span<const double> w) const override;
  double do_log_abs_det(std::span<const double> x) const override;
};

}  // namespace isogeo
