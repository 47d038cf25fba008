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
#include <span>
#include <vector>

namespace isogeo {

/// Dense real vector; used for points, tangent vectors and cotangents alike.
using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double squared_distance(std::span<const double> a, std::span<const double> b);
double distance_l2(std::span<const double> a, std::span<const double> b);

Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scaled(std::span<const double> a, double s);
/// Returns alpha * a + beta * b.
Vector lincomb(double alpha, std::span<const double> a, double beta,
               std::span<const double> b);
bool all_finite(std::span<const double> a);

/// Column-major dense matrix. Data sets are stored one point per column.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix from_columns(const std::vector<Vector>& columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[j * rows_ + i];
  }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }
  Vector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> v);

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Matrix transposed() const;
  /// Columns [first, first + count).
  Matrix columns(std::size_t first, std::size_t count) const;
  Matrix select_columns(std::span<const std::size_t> indices) const;

  double frobenius_norm() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);
/// Returns a^T x.
Vector matvec_transposed(const Matrix& a, std::span<const double> x);
Matrix operator-(const Matrix& a, const Matrix& b);

/// Thin singular value decomposition A = U diag(sigma) V^T with
/// k = min(rows, cols) singular triplets sorted nonincreasingly.
struct Svd {
  Matrix u;      ///< rows x k, orthonormal columns
  Vector sigma;  ///< k values, nonnegative and nonincreasing
  Matrix v;      ///< cols x k, orthonormal columns
};

/// One-sided (Hestenes) Jacobi SVD.
Svd svd(const Matrix& a);

/// U_r diag(sigma_r) V_r^T built from the leading r triplets.
Matrix truncated_product(const Svd& s, std::size_t r);

/// LU solve with partial pivoting; throws ConfigError on a singular matrix.
Matrix inverse(const Matrix& a);
/// log |det a|; throws ConfigError on a singular matrix.
double log_abs_determinant(const Matrix& a);

}  // namespace isogeo
