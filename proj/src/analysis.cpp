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

#include "isogeo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "isogeo/parallel.hpp"
#include "isogeo/pullback.hpp"

namespace isogeo {

const char* to_string(Variant v) { return v == Variant::Plain ? "plain" : "iso"; }

Variant variant_from_string(const std::string& s) {
  if (s == "plain") return Variant::Plain;
  if (s == "iso") return Variant::Iso;
  throw ConfigError("unknown variant '" + s + "' (expected plain or iso)");
}

namespace {

void check_data(const Matrix& x, const Vector& p) {
  if (x.cols() == 0) throw DomainError("no data points");
  if (x.rows() != p.size()) throw DomainError("base point dimension does not match data");
}

// Runs fn on every column; collects failing indices into one ColumnError.
template <class Fn>
void for_columns(std::size_t n, std::size_t threads, const char* what, Fn&& fn) {
  std::vector<std::optional<std::string>> errors(n);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      fn(i);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  std::vector<std::size_t> bad;
  std::string first;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      if (bad.empty()) first = *errors[i];
      bad.push_back(i);
    }
  }
  if (!bad.empty()) {
    std::string list;
    for (std::size_t k = 0; k < bad.size() && k < 20; ++k)
      list += (k ? "," : "") + std::to_string(bad[k]);
    if (bad.size() > 20) list += ",...";
    const std::string msg = std::string(what) + " failed on " + std::to_string(bad.size()) +
                            " column(s) [" + list + "]: " + first;
    throw ColumnError(msg, std::move(bad));
  }
}

}  // namespace

RankRResult tangent_rank_r(const Diffeomorphism& phi, const Matrix& x, const Vector& p,
                           std::size_t rank, Variant variant, const RankROptions& opts) {
  check_data(x, p);
  const std::size_t d = x.rows(), n = x.cols();
  if (rank < 1 || rank > std::min(d, n))
    throw ConfigError("rank must lie in [1, min(d, l)] = [1, " +
                      std::to_string(std::min(d, n)) + "]");
  RankRResult r;
  r.variant = variant;
  r.rank = rank;
  r.base = p;
  r.tangents = Matrix(d, n);
  for_columns(n, opts.threads, "log", [&](std::size_t i) {
    const Vector t = variant == Variant::Plain ? log_map(phi, p, x.col(i))
                                               : iso_log(phi, p, x.col(i), opts.resolution);
    r.tangents.set_column(i, t);
  });
  r.svd = svd(r.tangents);
  r.truncated = truncated_product(r.svd, rank);
  r.reconstructions = Matrix(d, n);
  for_columns(n, opts.threads, "exp", [&](std::size_t i) {
    const Vector y = variant == Variant::Plain
                         ? exp_map(phi, p, r.truncated.col(i))
                         : iso_exp(phi, p, r.truncated.col(i), opts.resolution).point;
    r.reconstructions.set_column(i, y);
  });
  return r;
}

double low_rank_rel_rmse(const Matrix& x, const Matrix& reconstructions, const Vector& p) {
  if (x.rows() != reconstructions.rows() || x.cols() != reconstructions.cols())
    throw ShapeError("rel-RMSE: reconstruction shape does not match data");
  check_data(x, p);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.cols(); ++i) {
    num += squared_distance(x.col(i), reconstructions.col(i));
    den += squared_distance(x.col(i), p);
  }
  if (den == 0.0) throw DegenerateError("rel-RMSE: all data points equal the base point");
  return std::sqrt(num / den);
}

Vector per_point_geodesic_rms(const Diffeomorphism& phi, const Matrix& x, const Vector& p,
                              std::size_t m, const RankROptions& opts) {
  check_data(x, p);
  if (m < 1) throw ConfigError("m must be >= 1");
  Vector rms(x.cols(), 0.0);
  for_columns(x.cols(), opts.threads, "geodesic", [&](std::size_t i) {
    const DiscreteGeodesic g = discretize_geodesic(phi, p, x.col(i), opts.resolution);
    double acc = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(m);
      Vector plain = (k == 0 || k == m)
                         ? (k == 0 ? g.points.front() : g.points.back())
                         : phi.inverse(lincomb(1.0 - t, g.latent_from, t, g.latent_to));
      acc += squared_distance(plain, iso_geodesic(phi, g, t));
    }
    rms[i] = std::sqrt(acc / static_cast<double>(m + 1));
  });
  return rms;
}

double geodesic_rel_rmse(const Diffeomorphism& phi, const Matrix& x, const Vector& p,
                         std::size_t m, const RankROptions& opts) {
  const Vector rms = per_point_geodesic_rms(phi, x, p, m, opts);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.cols(); ++i) {
    num += rms[i] * rms[i];
    den += squared_distance(x.col(i), p);
  }
  if (den == 0.0) throw DegenerateError("geodesic rel-RMSE: all data points equal the base point");
  return std::sqrt(num / den);
}

ErrorClouds error_point_clouds(const Diffeomorphism& phi, const Matrix& x, const Vector& p,
                               const RankRResult& plain, const RankRResult& iso,
                               std::size_t m, const RankROptions& opts) {
  check_data(x, p);
  const std::size_t n = x.cols();
  if (plain.reconstructions.cols() != n || iso.reconstructions.cols() != n)
    throw ShapeError("error clouds: reconstructions do not match data");
  ErrorClouds c;
  Vector dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = distance_l2(x.col(i), p);
  c.geodesic.distance = dist;
  c.geodesic.value = per_point_geodesic_rms(phi, x, p, m, opts);
  c.reconstruction.distance = dist;
  c.reconstruction.value.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    c.reconstruction.value[i] = distance_l2(x.col(i), plain.reconstructions.col(i)) -
                                distance_l2(x.col(i), iso.reconstructions.col(i));
  return c;
}

MMatrixDiagnostic m_matrix_diagnostic(const Diffeomorphism& phi, const Matrix& x,
                                      const Vector& p, Variant variant, double fd_step,
                                      const RankROptions& opts) {
  check_data(x, p);
  if (!(fd_step > 0.0)) throw ConfigError("finite-difference step must be > 0");
  const std::size_t d = x.rows(), n = x.cols();
  const auto rho = [&](std::span<const double> w) {
    return variant == Variant::Plain ? rho_id(w) : rho_iso(phi, p, w, opts.resolution);
  };
  const auto rho_inv = [&](std::span<const double> w) {
    return variant == Variant::Plain ? rho_id_inverse(w)
                                     : rho_iso_inverse(phi, p, w, opts.resolution);
  };
  const auto f = [&](std::span<const double> w) { return exp_map(phi, p, rho(w)); };

  MMatrixDiagnostic out;
  out.variant = variant;
  out.matrices.assign(n, Matrix());
  out.deviation.assign(n, std::nan(""));
  std::vector<std::uint8_t> ok(n, 0);
  parallel_for(n, opts.threads, [&](std::size_t i) {
    try {
      const Vector u = rho_inv(log_map(phi, p, x.col(i)));
      Matrix jac(d, d);
      for (std::size_t j = 0; j < d; ++j) {
        Vector up = u, um = u;
        up[j] += fd_step;
        um[j] -= fd_step;
        jac.set_column(j, scaled(sub(f(up), f(um)), 0.5 / fd_step));
      }
      Matrix gram = matmul(jac.transposed(), jac);
      out.deviation[i] = (gram - Matrix::identity(d)).frobenius_norm();
      out.matrices[i] = std::move(gram);
      ok[i] = 1;
    } catch (const Error&) {
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    if (!ok[i]) out.failed.push_back(i);
  return out;
}

namespace {

nlohmann::json cloud_json(const PointCloud& c) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i = 0; i < c.distance.size(); ++i) j.push_back({c.distance[i], c.value[i]});
  return j;
}

}  // namespace

nlohmann::json MetricsReport::to_json() const {
  return {
      {"rank", rank},
      {"m", m},
      {"resolution", resolution},
      {"points", points},
      {"base_point", base},
      {"singular_values_plain", singular_values_plain},
      {"singular_values_iso", singular_values_iso},
      {"low_rank_rel_rmse_plain", low_rank_rel_rmse_plain},
      {"low_rank_rel_rmse_iso", low_rank_rel_rmse_iso},
      {"geodesic_rel_rmse", geodesic_rel_rmse},
      {"geodesic_error_cloud", cloud_json(clouds.geodesic)},
      {"reconstruction_gain_cloud", cloud_json(clouds.reconstruction)},
  };
}

MetricsResult compute_metrics(const Diffeomorphism& phi, const Matrix& x, const Vector& p,
                              std::size_t rank, std::size_t m, const RankROptions& opts) {
  MetricsResult r;
  r.plain = tangent_rank_r(phi, x, p, rank, Variant::Plain, opts);
  r.iso = tangent_rank_r(phi, x, p, rank, Variant::Iso, opts);
  MetricsReport& rep = r.report;
  rep.rank = rank;
  rep.m = m;
  rep.resolution = opts.resolution;
  rep.points = x.cols();
  rep.base = p;
  rep.singular_values_plain = r.plain.svd.sigma;
  rep.singular_values_iso = r.iso.svd.sigma;
  rep.low_rank_rel_rmse_plain = low_rank_rel_rmse(x, r.plain.reconstructions, p);
  rep.low_rank_rel_rmse_iso = low_rank_rel_rmse(x, r.iso.reconstructions, p);
  rep.clouds = error_point_clouds(phi, x, p, r.plain, r.iso, m, opts);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.cols(); ++i) {
    num += rep.clouds.geodesic.value[i] * rep.clouds.geodesic.value[i];
    den += squared_distance(x.col(i), p);
  }
  rep.geodesic_rel_rmse = std::sqrt(num / den);
  return r;
}

namespace {

Vector ranks(std::span<const double> a) {
  std::vector<std::size_t> idx(a.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return a[i] < a[j]; });
  Vector r(a.size());
  for (std::size_t s = 0; s < idx.size();) {
    std::size_t e = s;
    while (e + 1 < idx.size() && a[idx[e + 1]] == a[idx[s]]) ++e;
    const double avg = 0.5 * static_cast<double>(s + e) + 1.0;
    for (std::size_t k = s; k <= e; ++k) r[idx[k]] = avg;
    s = e + 1;
  }
  return r;
}

}  // namespace

double spearman_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw ShapeError("spearman: need two equally long samples of size >= 2");
  Vector ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace isogeo
