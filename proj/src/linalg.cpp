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

#include "isogeo/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "isogeo/errors.hpp"

namespace isogeo {

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double distance_l2(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

Vector add(std::span<const double> a, std::span<const double> b) {
  return lincomb(1.0, a, 1.0, b);
}

Vector sub(std::span<const double> a, std::span<const double> b) {
  return lincomb(1.0, a, -1.0, b);
}

Vector scaled(std::span<const double> a, double s) {
  Vector out(a.begin(), a.end());
  for (double& v : out) v *= s;
  return out;
}

Vector lincomb(double alpha, std::span<const double> a, double beta,
               std::span<const double> b) {
  assert(a.size() == b.size());
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i] + beta * b[i];
  return out;
}

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_columns(const std::vector<Vector>& columns) {
  if (columns.empty()) return {};
  Matrix m(columns.front().size(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != m.rows_) throw DomainError("ragged column list");
    m.set_column(j, columns[j]);
  }
  return m;
}

Vector Matrix::column(std::size_t j) const {
  auto c = col(j);
  return {c.begin(), c.end()};
}

void Matrix::set_column(std::size_t j, std::span<const double> v) {
  assert(v.size() == rows_);
  std::copy(v.begin(), v.end(), col(j).begin());
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::columns(std::size_t first, std::size_t count) const {
  assert(first + count <= cols_);
  Matrix m(rows_, count);
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(first * rows_),
              count * rows_, m.data_.begin());
  return m;
}

Matrix Matrix::select_columns(std::span<const std::size_t> indices) const {
  Matrix m(rows_, indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) m.set_column(j, col(indices[j]));
  return m;
}

double Matrix::frobenius_norm() const { return norm(data_); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.rows());
  Matrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bkj;
    }
  return c;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  assert(a.cols() == x.size());
  Vector y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] += a(i, j) * x[j];
  return y;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
  assert(a.rows() == x.size());
  Vector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
  return y;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i)
    c.data()[i] = a.data()[i] - b.data()[i];
  return c;
}

namespace {

// Orthogonalizes the columns of w in place (w has at least as many rows as
// columns) and accumulates the rotations into v.
void hestenes_sweeps(Matrix& w, Matrix& v) {
  const std::size_t n = w.cols();
  constexpr int kMaxSweeps = 80;
  constexpr double kTol = 1e-15;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto wp = w.col(p);
        auto wq = w.col(q);
        const double alpha = dot(wp, wp);
        const double beta = dot(wq, wq);
        const double gamma = dot(wp, wq);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < w.rows(); ++i) {
          const double a = wp[i];
          const double b = wq[i];
          wp[i] = c * a - s * b;
          wq[i] = s * a + c * b;
        }
        auto vp = v.col(p);
        auto vq = v.col(q);
        for (std::size_t i = 0; i < v.rows(); ++i) {
          const double a = vp[i];
          const double b = vq[i];
          vp[i] = c * a - s * b;
          vq[i] = s * a + c * b;
        }
      }
    }
    if (!rotated) break;
  }
}

// Replaces the columns of q flagged in `missing` with unit vectors orthogonal
// to every other column (Gram-Schmidt against the canonical basis).
void complete_orthonormal(Matrix& q, const std::vector<bool>& missing) {
  std::size_t candidate = 0;
  for (std::size_t j = 0; j < q.cols(); ++j) {
    if (!missing[j]) continue;
    for (; candidate < q.rows(); ++candidate) {
      Vector e(q.rows(), 0.0);
      e[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < q.cols(); ++k) {
          if (k == j || (missing[k] && k > j)) continue;
          const double proj = dot(q.col(k), e);
          for (std::size_t i = 0; i < e.size(); ++i) e[i] -= proj * q(i, k);
        }
      }
      const double len = norm(e);
      if (len > 1e-8) {
        for (double& x : e) x /= len;
        q.set_column(j, e);
        ++candidate;
        break;
      }
    }
  }
}

}  // namespace

Svd svd(const Matrix& a) {
  if (!all_finite(a.data())) throw DomainError("svd: non-finite entry");
  const bool wide = a.rows() < a.cols();
  Matrix w = wide ? a.transposed() : a;
  const std::size_t k = w.cols();
  Matrix v = Matrix::identity(k);
  hestenes_sweeps(w, v);

  Vector sigma(k);
  for (std::size_t j = 0; j < k; ++j) sigma[j] = norm(w.col(j));
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return sigma[l] > sigma[r]; });

  const double smax = k > 0 ? sigma[order[0]] : 0.0;
  const double cutoff = smax * 1e-14 * static_cast<double>(std::max(w.rows(), k));
  Matrix left(w.rows(), k);
  Matrix right(k, k);
  Vector sorted(k);
  std::vector<bool> missing(k, false);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t src = order[j];
    sorted[j] = sigma[src];
    right.set_column(j, v.col(src));
    if (sigma[src] > cutoff && sigma[src] > 0.0) {
      auto dst = left.col(j);
      auto wc = w.col(src);
      for (std::size_t i = 0; i < w.rows(); ++i) dst[i] = wc[i] / sigma[src];
    } else {
      missing[j] = true;
    }
  }
  complete_orthonormal(left, missing);

  Svd out;
  out.sigma = std::move(sorted);
  if (wide) {
    out.u = std::move(right);
    out.v = std::move(left);
  } else {
    out.u = std::move(left);
    out.v = std::move(right);
  }
  return out;
}

Matrix truncated_product(const Svd& s, std::size_t r) {
  r = std::min(r, s.sigma.size());
  Matrix out(s.u.rows(), s.v.rows());
  for (std::size_t k = 0; k < r; ++k) {
    const double sk = s.sigma[k];
    for (std::size_t j = 0; j < s.v.rows(); ++j) {
      const double f = sk * s.v(j, k);
      if (f == 0.0) continue;
      for (std::size_t i = 0; i < s.u.rows(); ++i) out(i, j) += s.u(i, k) * f;
    }
  }
  return out;
}

namespace {

struct Lu {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
};

Lu lu_decompose(const Matrix& a) {
  if (a.rows() != a.cols()) throw ConfigError("LU of a non-square matrix");
  const std::size_t n = a.rows();
  Lu f{a, std::vector<std::size_t>(n), 1};
  std::iota(f.perm.begin(), f.perm.end(), 0);
  Matrix& m = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
    if (m(piv, k) == 0.0) throw ConfigError("singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
      f.sign = -f.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      m(i, k) /= m(k, k);
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= m(i, k) * m(k, j);
    }
  }
  return f;
}

}  // namespace

Matrix inverse(const Matrix& a) {
  const Lu f = lu_decompose(a);
  const std::size_t n = a.rows();
  Matrix inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    Vector x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = f.perm[i] == c ? 1.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
      x[i] /= f.lu(i, i);
    }
    inv.set_column(c, x);
  }
  return inv;
}

double log_abs_determinant(const Matrix& a) {
  const Lu f = lu_decompose(a);
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += std::log(std::abs(f.lu(i, i)));
  return s;
}

}  // namespace isogeo
