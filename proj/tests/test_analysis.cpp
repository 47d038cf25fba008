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
#include <string>

#include "isogeo/analysis.hpp"
#include "isogeo/datasets.hpp"
#include "isogeo/diffeomorphism.hpp"
#include "isogeo/errors.hpp"
#include "isogeo/pullback.hpp"
#include "oracles.hpp"

using namespace isogeo;

namespace {

const IdentityDiffeo kId2(2);
const QuadraticShear kShear;
const ModeledDoubleGaussian kModeled;

Matrix random_cloud(std::size_t d, std::size_t n, std::uint64_t seed, double spread = 1.0) {
  std::mt19937_64 rng(seed);
  Matrix x(d, n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vector v = oracle::random_vector(d, rng, spread);
    for (std::size_t i = 0; i < d; ++i) x(i, j) = v[i] * (1.0 + i);  // anisotropic
  }
  return x;
}

Vector column_mean(const Matrix& x) {
  Vector m(x.rows(), 0.0);
  for (std::size_t j = 0; j < x.cols(); ++j)
    for (std::size_t i = 0; i < x.rows(); ++i) m[i] += x(i, j) / x.cols();
  return m;
}

// Top-r PCA about p by power iteration with deflation on the scatter matrix.
Matrix pca_reconstruction(const Matrix& x, const Vector& p, std::size_t r) {
  const std::size_t d = x.rows();
  Matrix c(d, d);
  for (std::size_t j = 0; j < x.cols(); ++j)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) c(a, b) += (x(a, j) - p[a]) * (x(b, j) - p[b]);
  std::vector<Vector> basis;
  for (std::size_t k = 0; k < r; ++k) {
    Vector v(d, 1.0 / std::sqrt(static_cast<double>(d)));
    v[k % d] += 0.5;
    for (int it = 0; it < 5000; ++it) {
      Vector w = matvec(c, v);
      for (const Vector& u : basis) w = sub(w, scaled(u, dot(u, w)));
      v = scaled(w, 1.0 / norm(w));
    }
    basis.push_back(v);
  }
  Matrix out(d, x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const Vector t = sub(x.column(j), p);
    Vector rec = p;
    for (const Vector& u : basis) rec = add(rec, scaled(u, dot(u, t)));
    out.set_column(j, rec);
  }
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return oracle::max_abs_diff(a.data(), b.data());
}

// Identity on R^2 whose image is restricted to first coordinate <= 5.
class RestrictedIdentity final : public Diffeomorphism {
 public:
  std::size_t dim() const override { return 2; }

 protected:
  Vector do_forward(std::span<const double> x) const override { return {x.begin(), x.end()}; }
  Vector do_inverse(std::span<const double> y) const override {
    if (y[0] > 5.0) throw OutOfImageError("outside the half plane");
    return {y.begin(), y.end()};
  }
  Vector do_jvp(std::span<const double>, std::span<const double> v) const override {
    return {v.begin(), v.end()};
  }
  Vector do_inverse_jvp(std::span<const double> y, std::span<const double> w) const override {
    if (y[0] > 5.0) throw OutOfImageError("outside the half plane");
    return {w.begin(), w.end()};
  }
  double do_log_abs_det(std::span<const double>) const override { return 0.0; }
};

}  // namespace

TEST(RankR, HandExample) {
  const Matrix x = Matrix::from_columns({{2, 0}, {0, 1}});
  const RankRResult r = tangent_rank_r(kId2, x, Vector{0, 0}, 1, Variant::Plain);
  EXPECT_LT(max_abs_diff(r.reconstructions, Matrix::from_columns({{2, 0}, {0, 0}})), 1e-14);
  EXPECT_NEAR(r.svd.sigma[0], 2.0, 1e-14);
  EXPECT_NEAR(r.svd.sigma[1], 1.0, 1e-14);
}

TEST(RankR, IdentityMatchesPca) {
  const IdentityDiffeo id4(4);
  const Matrix x = random_cloud(4, 30, 1);
  const Vector p = column_mean(x);
  for (std::size_t r : {1u, 2u, 3u}) {
    const RankRResult res = tangent_rank_r(id4, x, p, r, Variant::Plain);
    EXPECT_LT(max_abs_diff(res.reconstructions, pca_reconstruction(x, p, r)), 1e-8) << r;
  }
}

TEST(RankR, IdentityIsoEqualsPlain) {
  const Matrix x = random_cloud(2, 15, 2);
  const Vector p = column_mean(x);
  const RankRResult a = tangent_rank_r(kId2, x, p, 1, Variant::Plain);
  const RankRResult b = tangent_rank_r(kId2, x, p, 1, Variant::Iso);
  EXPECT_LT(max_abs_diff(a.reconstructions, b.reconstructions), 1e-12);
  EXPECT_LT(max_abs_diff(a.tangents, b.tangents), 1e-12);
}

TEST(RankR, FullRankReproducesData) {
  const Matrix x = sample_bimodal_gaussian(40, 3);
  const Vector p = barycentre(kModeled, x);
  const RankRResult plain = tangent_rank_r(kModeled, x, p, 2, Variant::Plain);
  EXPECT_LT(max_abs_diff(plain.reconstructions, x), 1e-6);
  const RankRResult iso = tangent_rank_r(kModeled, x, p, 2, Variant::Iso, {1000, 1});
  EXPECT_LT(max_abs_diff(iso.reconstructions, x), 1e-2);
}

TEST(RankR, TruncationErrorIsSingularTail) {
  const IdentityDiffeo id5(5);
  const Matrix x = random_cloud(5, 12, 4);
  const Vector p = column_mean(x);
  for (Variant v : {Variant::Plain, Variant::Iso}) {
    const RankRResult r = tangent_rank_r(id5, x, p, 2, v, {50, 1});
    double tail = 0.0;
    for (std::size_t k = 2; k < r.svd.sigma.size(); ++k) tail += r.svd.sigma[k] * r.svd.sigma[k];
    EXPECT_NEAR((r.tangents - r.truncated).frobenius_norm(), std::sqrt(tail), 1e-10);
    for (std::size_t k = 1; k < r.svd.sigma.size(); ++k)
      EXPECT_LE(r.svd.sigma[k], r.svd.sigma[k - 1]);
  }
}

TEST(RankR, InvalidRank) {
  const Matrix x = random_cloud(2, 5, 5);
  EXPECT_THROW(tangent_rank_r(kId2, x, Vector{0, 0}, 0, Variant::Plain), ConfigError);
  EXPECT_THROW(tangent_rank_r(kId2, x, Vector{0, 0}, 3, Variant::Plain), ConfigError);
}

TEST(RankR, FailingColumnsAreListed) {
  const RestrictedIdentity phi;
  const Matrix x = Matrix::from_columns({{0, 0}, {9, 1}, {1, 2}, {7, -1}});
  try {
    tangent_rank_r(phi, x, Vector{0, 0}, 1, Variant::Plain);
    FAIL() << "expected a column error";
  } catch (const ColumnError& e) {
    EXPECT_EQ(e.indices(), (std::vector<std::size_t>{1, 3}));
    EXPECT_NE(std::string(e.what()).find("2 column(s)"), std::string::npos) << e.what();
  }
}

TEST(RelRmse, Examples) {
  const Matrix x = random_cloud(3, 10, 6);
  const Vector p{0.1, 0.2, 0.3};
  EXPECT_EQ(low_rank_rel_rmse(x, x, p), 0.0);
  Matrix at_p(3, 10);
  for (std::size_t j = 0; j < 10; ++j) at_p.set_column(j, p);
  EXPECT_NEAR(low_rank_rel_rmse(x, at_p, p), 1.0, 1e-15);
  EXPECT_THROW(low_rank_rel_rmse(at_p, x, p), DegenerateError);
}

TEST(GeodesicRelRmse, ZeroForConstantSpeedMaps) {
  const Matrix x = random_cloud(2, 10, 7);
  const Vector p = column_mean(x);
  EXPECT_LT(geodesic_rel_rmse(kId2, x, p, 20, {20, 1}), 1e-14);
  Matrix a(2, 2);
  a(0, 0) = 1.5;
  a(1, 0) = 0.7;
  a(1, 1) = -0.4;
  const AffineLinearDiffeo lin(a, Vector{1.0, -2.0});
  EXPECT_LT(geodesic_rel_rmse(lin, x, p, 20, {20, 1}), 1e-10);
}

TEST(GeodesicRelRmse, ModeledPositiveAndConverging) {
  const Matrix x = sample_bimodal_gaussian(30, 8);
  const Vector p = barycentre(kModeled, x);
  const double coarse = geodesic_rel_rmse(kModeled, x, p, 20, {20, 1});
  const double mid = geodesic_rel_rmse(kModeled, x, p, 100, {100, 1});
  const double fine = geodesic_rel_rmse(kModeled, x, p, 400, {400, 1});
  EXPECT_GT(fine, 0.05);
  EXPECT_LT(std::abs(mid - fine), std::abs(coarse - fine));
  EXPECT_LT(std::abs(mid - fine), 0.01 * fine);
}

TEST(Clouds, IdentityIsFlat) {
  const Matrix x = random_cloud(2, 12, 9);
  const Vector p = column_mean(x);
  const MetricsResult m = compute_metrics(kId2, x, p, 1, 10, {10, 1});
  ASSERT_EQ(m.report.clouds.geodesic.value.size(), 12u);
  ASSERT_EQ(m.report.clouds.reconstruction.value.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_LT(m.report.clouds.geodesic.value[i], 1e-14);
    EXPECT_NEAR(m.report.clouds.reconstruction.value[i], 0.0, 1e-12);
    EXPECT_NEAR(m.report.clouds.geodesic.distance[i], distance_l2(x.column(i), p), 1e-15);
  }
}

TEST(Clouds, ShearGeodesicGapsNonnegative) {
  const Matrix x = random_cloud(2, 12, 10, 0.5);
  const Vector p = barycentre(kShear, x);
  const MetricsResult m = compute_metrics(kShear, x, p, 1, 20, {50, 1});
  for (double v : m.report.clouds.geodesic.value) EXPECT_GE(v, 0.0);
}

TEST(Clouds, ModeledDistortionGrowsWithDistance) {
  const Matrix x = sample_bimodal_gaussian(100, 11);
  const Vector p = barycentre(kModeled, x);
  const MetricsResult m = compute_metrics(kModeled, x, p, 1, 100, {100, 1});
  EXPECT_GT(spearman_correlation(m.report.clouds.geodesic.distance, m.report.clouds.geodesic.value),
            0.0);
}

TEST(Spearman, Examples) {
  const Vector a{1, 2, 3, 4, 5}, b{2, 4, 8, 16, 32}, c{5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman_correlation(a, b), 1.0, 1e-15);
  EXPECT_NEAR(spearman_correlation(a, c), -1.0, 1e-15);
  // Average ranks (1, 2.5, 2.5, 4) against (1, 2, 3, 4).
  EXPECT_NEAR(spearman_correlation(Vector{1, 2, 2, 3}, Vector{1, 2, 3, 4}), 4.5 / std::sqrt(22.5),
              1e-14);
}

TEST(MetricsReport, JsonFields) {
  const Matrix x = sample_bimodal_gaussian(20, 12);
  const Vector p = barycentre(kModeled, x);
  const MetricsResult m = compute_metrics(kModeled, x, p, 1, 20, {20, 1});
  const auto j = m.report.to_json();
  for (const char* key : {"rank", "m", "resolution", "points", "base_point", "singular_values_plain",
                          "singular_values_iso", "low_rank_rel_rmse_plain",
                          "low_rank_rel_rmse_iso", "geodesic_rel_rmse", "geodesic_error_cloud",
                          "reconstruction_gain_cloud"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["points"].get<std::size_t>(), 20u);
  EXPECT_EQ(j["geodesic_error_cloud"].size(), 20u);
  EXPECT_NEAR(m.report.low_rank_rel_rmse_plain,
              low_rank_rel_rmse(x, m.plain.reconstructions, p), 1e-15);
}

TEST(MMatrix, IdentityAndScaledIdentityGiveIdentity) {
  const Matrix x = random_cloud(2, 10, 13);
  const Vector p = column_mean(x);
  Matrix two(2, 2);
  two(0, 0) = two(1, 1) = 2.0;
  const AffineLinearDiffeo doubled(two);
  for (const Diffeomorphism* phi : {static_cast<const Diffeomorphism*>(&kId2),
                                    static_cast<const Diffeomorphism*>(&doubled)}) {
    const MMatrixDiagnostic d = m_matrix_diagnostic(*phi, x, p, Variant::Plain);
    ASSERT_TRUE(d.failed.empty());
    for (std::size_t i = 0; i < 10; ++i) {
      EXPECT_LT(max_abs_diff(d.matrices[i], Matrix::identity(2)), 1e-6);
      EXPECT_LT(d.deviation[i], 1e-6);
    }
  }
}

TEST(MMatrix, ShearGramMatrices) {
  const Matrix x = random_cloud(2, 8, 14, 0.5);
  const Vector p = barycentre(kShear, x);
  const MMatrixDiagnostic plain = m_matrix_diagnostic(kShear, x, p, Variant::Plain);
  const MMatrixDiagnostic iso = m_matrix_diagnostic(kShear, x, p, Variant::Iso, 1e-4, {200, 1});
  ASSERT_TRUE(plain.failed.empty());
  ASSERT_TRUE(iso.failed.empty());
  for (const auto* d : {&plain, &iso}) {
    for (std::size_t i = 0; i < 8; ++i) {
      const Matrix& m = d->matrices[i];
      EXPECT_NEAR(m(0, 1), m(1, 0), 1e-10);
      EXPECT_GE(m(0, 0), 0.0);
      EXPECT_GE(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0), -1e-8);
      EXPECT_TRUE(std::isfinite(d->deviation[i]));
    }
  }
  // The shear is not an isometry, so the plain matrices move away from I.
  double worst = 0.0;
  for (double v : plain.deviation) worst = std::max(worst, v);
  EXPECT_GT(worst, 1e-3);
}

TEST(MMatrix, BadStep) {
  EXPECT_THROW(m_matrix_diagnostic(kId2, random_cloud(2, 3, 15), Vector{0, 0}, Variant::Plain, 0.0),
               ConfigError);
}

TEST(Variant, Names) {
  EXPECT_EQ(variant_from_string("plain"), Variant::Plain);
  EXPECT_EQ(variant_from_string(to_string(Variant::Iso)), Variant::Iso);
  EXPECT_THROW(variant_from_string("fancy"), ConfigError);
}
