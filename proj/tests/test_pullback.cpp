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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "isogeo/diffeomorphism.hpp"
#include "isogeo/errors.hpp"
#include "isogeo/pullback.hpp"
#include "oracles.hpp"

using namespace isogeo;

namespace {
const IdentityDiffeo kId(2);
const QuadraticShear kShear;

void expect_near(const Vector& a, const Vector& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "entry " << i;
}

// Points with |x1 + x2| well inside the image strip of the modeled map.
Vector modeled_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  return {u(rng), u(rng)};
}
}  // namespace

TEST(Geodesic, Examples) {
  expect_near(geodesic(kId, Vector{0, 0}, Vector{2, 0}, 0.5), {1, 0}, 1e-15);
  expect_near(geodesic(kShear, Vector{-1, 1}, Vector{1, 1}, 0.5), {0, 2}, 1e-15);
}

TEST(Geodesic, EndpointsExact) {
  const ModeledDoubleGaussian phi;
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const Vector x = modeled_point(rng), y = modeled_point(rng);
    EXPECT_EQ(geodesic(phi, x, y, 0.0), x);
    EXPECT_EQ(geodesic(phi, x, y, 1.0), y);
  }
}

TEST(Geodesic, LatentImageIsAffine) {
  const ModeledDoubleGaussian phi;
  const Vector x{-1.0, 0.5}, y{1.5, 0.25};
  const Vector zx = phi.forward(x), zy = phi.forward(y);
  for (double t : {0.1, 0.37, 0.8}) {
    const Vector z = phi.forward(geodesic(phi, x, y, t));
    expect_near(z, add(scaled(zx, 1 - t), scaled(zy, t)), 1e-10);
  }
}

TEST(Geodesic, OutOfImage) {
  const ModeledDoubleGaussian phi;
  // Latent second coordinates near +-1 extrapolate past the strip.
  const Vector x{8.0, 8.0}, y{-8.0, -8.0};
  EXPECT_THROW(geodesic(phi, x, y, 3.0), OutOfImageError);
}

TEST(ExpLog, Examples) {
  expect_near(exp_map(kId, Vector{1, 1}, Vector{1, 0}), {2, 1}, 1e-15);
  expect_near(exp_map(kShear, Vector{0, 0}, Vector{1, 2}), {1, 1}, 1e-15);
  expect_near(exp_map(kShear, Vector{0.3, -2}, Vector{0, 0}), {0.3, -2}, 0.0);
  expect_near(log_map(kId, Vector{0, 0}, Vector{3, 4}), {3, 4}, 1e-15);
  expect_near(log_map(kShear, Vector{0, 0}, Vector{1, 1}), {1, 2}, 1e-15);
  expect_near(log_map(kShear, Vector{0.7, 0.1}, Vector{0.7, 0.1}), {0, 0}, 0.0);
}

TEST(ExpLog, InverseBothWays) {
  const ModeledDoubleGaussian phi;
  std::mt19937_64 rng(2);
  for (int k = 0; k < 200; ++k) {
    const Vector x = modeled_point(rng), y = modeled_point(rng);
    expect_near(exp_map(phi, x, log_map(phi, x, y)), y, 1e-6);
    const Vector v = log_map(phi, x, y);
    expect_near(log_map(phi, x, exp_map(phi, x, v)), v, 1e-6);
  }
}

TEST(Distance, Examples) {
  EXPECT_DOUBLE_EQ(distance(kId, Vector{0, 0}, Vector{3, 4}), 5.0);
  Matrix two(2, 2);
  two(0, 0) = two(1, 1) = 2.0;
  const AffineLinearDiffeo doubled(two);
  EXPECT_DOUBLE_EQ(distance(doubled, Vector{0, 0}, Vector{1, 0}), 2.0);
  EXPECT_DOUBLE_EQ(distance(kShear, Vector{-1, 1}, Vector{1, 1}), 2.0);
}

TEST(Distance, MetricAxioms) {
  const ModeledDoubleGaussian phi;
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const Vector a = modeled_point(rng), b = modeled_point(rng), c = modeled_point(rng);
    const double ab = distance(phi, a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_EQ(ab, distance(phi, b, a));
    EXPECT_LE(distance(phi, a, c), ab + distance(phi, b, c) + 1e-10);
    EXPECT_EQ(distance(phi, a, a), 0.0);
  }
}

TEST(Distance, AffineLatentParametrization) {
  const ModeledDoubleGaussian phi;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Vector x = modeled_point(rng), y = modeled_point(rng);
    const double s = u(rng), t = u(rng);
    EXPECT_NEAR(distance(phi, geodesic(phi, x, y, s), geodesic(phi, x, y, t)),
                std::abs(t - s) * distance(phi, x, y), 1e-8);
  }
}

TEST(ParallelTransport, Examples) {
  expect_near(parallel_transport(kId, Vector{0, 0}, Vector{5, 1}, Vector{0.3, 0.4}), {0.3, 0.4},
              0.0);
  expect_near(parallel_transport(kShear, Vector{0, 0}, Vector{1, 1}, Vector{1, 0}), {1, -2},
              1e-15);
}

TEST(ParallelTransport, RoundTripAndLinearity) {
  const ModeledDoubleGaussian phi;
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const Vector x = modeled_point(rng), y = modeled_point(rng);
    const Vector v = oracle::random_vector(2, rng), w = oracle::random_vector(2, rng);
    expect_near(parallel_transport(phi, y, x, parallel_transport(phi, x, y, v)), v, 1e-8);
    expect_near(parallel_transport(phi, x, x, v), v, 1e-12);
    expect_near(parallel_transport(phi, x, y, add(scaled(v, 2.0), w)),
                add(scaled(parallel_transport(phi, x, y, v), 2.0), parallel_transport(phi, x, y, w)),
                1e-9);
  }
}

TEST(Barycentre, Examples) {
  Matrix pts = Matrix::from_columns({{0, 0}, {2, 2}});
  expect_near(barycentre(kId, pts), {1, 1}, 1e-15);
  expect_near(barycentre(kShear, Matrix::from_columns({{-1, 1}, {1, 1}})), {0, 2}, 1e-15);
  expect_near(barycentre(kShear, Matrix::from_columns({{0.25, -3}})), {0.25, -3}, 1e-15);
}

TEST(Barycentre, MatchesGridSearch) {
  const Matrix pts = Matrix::from_columns({{-0.6, 0.2}, {0.9, 0.7}, {0.1, -0.4}, {0.5, 0.1}});
  const Vector b = barycentre(kShear, pts);
  auto cost = [&](const Vector& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.cols(); ++i) {
      const double d = distance(kShear, p, pts.column(i));
      s += d * d;
    }
    return s;
  };
  // Brute force with step 1e-3 on a box containing the data and the answer.
  const double step = 1e-3;
  double best = 1e300;
  Vector arg;
  for (double x1 = -1.0; x1 <= 1.0; x1 += step)
    for (double x2 = -1.0; x2 <= 1.0; x2 += step) {
      const double c = cost({x1, x2});
      if (c < best) {
        best = c;
        arg = {x1, x2};
      }
    }
  EXPECT_LE(cost(b), best + 1e-12);
  EXPECT_LT(std::abs(arg[0] - b[0]), 2 * step);
  EXPECT_LT(std::abs(arg[1] - b[1]), 2 * step);
}

TEST(Barycentre, EmptySetRejected) {
  EXPECT_THROW(barycentre(kId, Matrix(2, 0)), Error);
}
