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

#include "isogeo/errors.hpp"
#include "isogeo/linalg.hpp"
#include "oracles.hpp"

using namespace isogeo;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (double& v : m.data()) v = n(rng);
  return m;
}

double orthonormality_residual(const Matrix& q) {
  return (matmul(q.transposed(), q) - Matrix::identity(q.cols())).frobenius_norm();
}

Matrix reconstruct(const Svd& s) { return truncated_product(s, s.sigma.size()); }

}  // namespace

TEST(Svd, DiagonalMatrix) {
  Matrix a(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  const Svd s = svd(a);
  ASSERT_EQ(s.sigma.size(), 2u);
  EXPECT_NEAR(s.sigma[0], 3.0, 1e-14);
  EXPECT_NEAR(s.sigma[1], 1.0, 1e-14);
}

TEST(Svd, SortsAscendingDiagonal) {
  Matrix a(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 5.0;
  a(2, 2) = 2.0;
  const Svd s = svd(a);
  EXPECT_NEAR(s.sigma[0], 5.0, 1e-14);
  EXPECT_NEAR(s.sigma[1], 2.0, 1e-14);
  EXPECT_NEAR(s.sigma[2], 1.0, 1e-14);
}

TEST(Svd, RankOneOuterProduct) {
  const Vector u{1.0, 2.0, -1.0}, v{0.5, 3.0};
  Matrix a(3, 2);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) a(i, j) = u[i] * v[j];
  const Svd s = svd(a);
  EXPECT_NEAR(s.sigma[0], norm(u) * norm(v), 1e-12);
  EXPECT_NEAR(s.sigma[1], 0.0, 1e-12);
  EXPECT_LT(orthonormality_residual(s.u), 1e-12);
  EXPECT_LT(orthonormality_residual(s.v), 1e-12);
}

TEST(Svd, RandomWideMatrixResiduals) {
  const Matrix a = random_matrix(5, 8, 3);
  const Svd s = svd(a);
  ASSERT_EQ(s.sigma.size(), 5u);
  EXPECT_LT((reconstruct(s) - a).frobenius_norm(), 1e-10 * a.frobenius_norm());
  EXPECT_LT(orthonormality_residual(s.u), 1e-10);
  EXPECT_LT(orthonormality_residual(s.v), 1e-10);
  for (std::size_t k = 1; k < s.sigma.size(); ++k) EXPECT_GE(s.sigma[k - 1], s.sigma[k]);
}

TEST(Svd, RandomTallMatrixResiduals) {
  const Matrix a = random_matrix(9, 4, 4);
  const Svd s = svd(a);
  EXPECT_LT((reconstruct(s) - a).frobenius_norm(), 1e-10 * a.frobenius_norm());
  EXPECT_LT(orthonormality_residual(s.u), 1e-10);
  EXPECT_LT(orthonormality_residual(s.v), 1e-10);
}

TEST(Svd, RankDeficientKeepsOrthonormalFactors) {
  Matrix a = random_matrix(6, 2, 5);
  Matrix b(6, 4);
  for (std::size_t i = 0; i < 6; ++i) {
    b(i, 0) = a(i, 0);
    b(i, 1) = a(i, 1);
    b(i, 2) = a(i, 0) + a(i, 1);
    b(i, 3) = 0.0;
  }
  const Svd s = svd(b);
  EXPECT_NEAR(s.sigma[2], 0.0, 1e-12);
  EXPECT_NEAR(s.sigma[3], 0.0, 1e-12);
  EXPECT_LT(orthonormality_residual(s.u), 1e-10);
  EXPECT_LT(orthonormality_residual(s.v), 1e-10);
  EXPECT_LT((reconstruct(s) - b).frobenius_norm(), 1e-10 * b.frobenius_norm());
}

TEST(Svd, TruncationErrorMatchesTailSingularValues) {
  const Matrix a = random_matrix(6, 10, 6);
  const Svd s = svd(a);
  for (std::size_t r = 1; r <= 6; ++r) {
    double tail = 0.0;
    for (std::size_t k = r; k < s.sigma.size(); ++k) tail += s.sigma[k] * s.sigma[k];
    EXPECT_NEAR((truncated_product(s, r) - a).frobenius_norm(), std::sqrt(tail), 1e-10);
  }
}

TEST(Svd, ZeroMatrix) {
  const Svd s = svd(Matrix(3, 2));
  EXPECT_EQ(s.sigma[0], 0.0);
  EXPECT_LT(orthonormality_residual(s.u), 1e-12);
}

TEST(Svd, RejectsNonFinite) {
  Matrix a(2, 2);
  a(0, 0) = std::nan("");
  EXPECT_THROW(svd(a), DomainError);
}

TEST(Linalg, InverseAndDeterminant) {
  const Matrix a = random_matrix(4, 4, 7);
  EXPECT_LT((matmul(a, inverse(a)) - Matrix::identity(4)).frobenius_norm(), 1e-10);
  Matrix d(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 2.0;
  EXPECT_NEAR(log_abs_determinant(d), 2.0 * std::log(2.0), 1e-15);
  EXPECT_THROW(inverse(Matrix(2, 2)), ConfigError);
}

TEST(Linalg, VectorHelpers) {
  const Vector a{3.0, 4.0}, b{1.0, 1.0};
  EXPECT_DOUBLE_EQ(norm(a), 5.0);
  EXPECT_DOUBLE_EQ(dot(a, b), 7.0);
  EXPECT_DOUBLE_EQ(squared_distance(a, b), 13.0);
  EXPECT_EQ(lincomb(2.0, a, -1.0, b), (Vector{5.0, 7.0}));
  EXPECT_FALSE(all_finite(Vector{1.0, INFINITY}));
}
