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

// Tangent-space rank-r approximation (plain and isometrized), the rel-RMSE
// metrics, per-point error clouds and the M-matrix diagnostic.

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "isogeo/diffeomorphism.hpp"
#include "isogeo/errors.hpp"
#include "isogeo/iso.hpp"
#include "isogeo/linalg.hpp"

namespace isogeo {

enum class Variant { Plain, Iso };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// A geometry mapping failed on some data columns.
class ColumnError : public Error {
 public:
  ColumnError(const std::string& what, std::vector<std::size_t> indices)
      : Error(what), indices_(std::move(indices)) {}
  const std::vector<std::size_t>& indices() const { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

struct RankRResult {
  Variant variant = Variant::Plain;
  std::size_t rank = 0;
  Vector base;
  Matrix tangents;   ///< log_p(X) or iso_log_p(X), d x l
  Svd svd;
  Matrix truncated;  ///< U_r S_r V_r^T
  Matrix reconstructions;
};

struct RankROptions {
  std::size_t resolution = kDefaultResolution;
  std::size_t threads = 1;
};

/// Columns of X are data points. Throws ColumnError listing the columns whose
/// log or exp failed.
RankRResult tangent_rank_r(const Diffeomorphism& phi, const Matrix& x, const Vector& p,
                           std::size_t rank, Variant variant, const RankROptions& opts = {});

/// sqrt(sum |x_i - xr_i|^2 / sum |x_i - p|^2); DegenerateError when every x_i = p.
double low_rank_rel_rmse(const Matrix& x, const Matrix& reconstructions, const Vector& p);

/// Root mean square gap between gamma_{p,x_i}(k/m) and its isometrized
/// version, k = 0..m.
Vector per_point_geodesic_rms(const Diffeomorphism& phi, const Matrix& x, const Vector& p,
                              std::size_t m, const RankROptions& opts = {});

double geodesic_rel_rmse(const Diffeomorphism& phi, const Matrix& x, const Vector& p,
                         std::size_t m, const RankROptions& opts = {});

struct PointCloud {
  Vector distance;  ///< |x_i - p|
  Vector value;
};

struct ErrorClouds {
  PointCloud geodesic;        ///< value: per-point geodesic RMS gap
  PointCloud reconstruction;  ///< value: plain minus iso reconstruction error
};

ErrorClouds error_point_clouds(const Diffeomorphism& phi, const Matrix& x, const Vector& p,
                               const RankRResult& plain, const RankRResult& iso,
                               std::size_t m, const RankROptions& opts = {});

struct MMatrixDiagnostic {
  Variant variant = Variant::Plain;
  std::vector<Matrix> matrices;  ///< J^T J with J the differential of exp_p o rho
  Vector deviation;              ///< |M_i - I|_F
  std::vector<std::size_t> failed;
};

MMatrixDiagnostic m_matrix_diagnostic(const Diffeomorphism& phi, const Matrix& x,
                                      const Vector& p, Variant variant,
                                      double fd_step = 1e-4, const RankROptions& opts = {});

struct MetricsReport {
  std::size_t rank = 0;
  std::size_t m = 0;
  std::size_t resolution = 0;
  std::size_t points = 0;
  Vector base;
  Vector singular_values_plain;
  Vector singular_values_iso;
  double low_rank_rel_rmse_plain = 0.0;
  double low_rank_rel_rmse_iso = 0.0;
  double geodesic_rel_rmse = 0.0;
  ErrorClouds clouds;

  nlohmann::json to_json() const;
};

struct MetricsResult {
  MetricsReport report;
  RankRResult plain;
  RankRResult iso;
};

/// Runs both rank-r variants at p, the geodesic metric and the clouds.
MetricsResult compute_metrics(const Diffeomorphism& phi, const Matrix& x, const Vector& p,
                              std::size_t rank, std::size_t m,
                              const RankROptions& opts = {});

/// Rank correlation with average ranks for ties.
double spearman_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace isogeo
