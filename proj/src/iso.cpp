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

#include "isogeo/iso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isogeo/pullback.hpp"

namespace isogeo {

namespace {

bool same_point(std::span<const double> x, std::span<const double> y) {
  return std::equal(x.begin(), x.end(), y.begin(), y.end());
}

void check_resolution(std::size_t m) {
  if (m == 0) throw ConfigError("geodesic resolution must be >= 1");
}

}  // namespace

double DiscreteGeodesic::time_change(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("time change: t outside [0, 1]");
  const double total = length();
  if (total == 0.0) return t;
  const double target = t * total;
  const auto m = resolution;
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  std::size_t k = static_cast<std::size_t>(it - cumulative.begin()) - 1;
  k = std::min(k, m - 1);
  const double seg = cumulative[k + 1] - cumulative[k];
  double frac = seg > 0.0 ? (target - cumulative[k]) / seg : 0.0;
  frac = std::clamp(frac, 0.0, 1.0);
  return (static_cast<double>(k) + frac) / static_cast<double>(m);
}

double time_change(const DiscreteGeodesic& g, double t) { return g.time_change(t); }

DiscreteGeodesic discretize_geodesic(const Diffeomorphism& phi, std::span<const double> x,
                                     std::span<const double> y, std::size_t resolution) {
  check_resolution(resolution);
  DiscreteGeodesic g;
  g.resolution = resolution;
  g.latent_from = phi.forward(x);
  g.latent_to = phi.forward(y);
  g.points.reserve(resolution + 1);
  g.cumulative.reserve(resolution + 1);
  g.points.emplace_back(x.begin(), x.end());
  g.cumulative.push_back(0.0);
  const double m = static_cast<double>(resolution);
  for (std::size_t k = 1; k <= resolution; ++k) {
    Vector p;
    if (k == resolution) {
      p.assign(y.begin(), y.end());
    } else {
      const double t = static_cast<double>(k) / m;
      p = phi.inverse(lincomb(1.0 - t, g.latent_from, t, g.latent_to));
    }
    g.cumulative.push_back(g.cumulative.back() + distance_l2(p, g.points.back()));
    g.points.push_back(std::move(p));
  }
  return g;
}

Vector iso_geodesic(const Diffeomorphism& phi, const DiscreteGeodesic& g, double t) {
  const double s = g.time_change(t);
  if (s == 0.0) return g.points.front();
  if (s == 1.0) return g.points.back();
  return phi.inverse(lincomb(1.0 - s, g.latent_from, s, g.latent_to));
}

Vector iso_geodesic(const Diffeomorphism& phi, std::span<const double> x,
                    std::span<const double> y, double t, std::size_t resolution) {
  return iso_geodesic(phi, discretize_geodesic(phi, x, y, resolution), t);
}

Vector iso_log(const Diffeomorphism& phi, std::span<const double> x,
               std::span<const double> y, std::size_t resolution) {
  check_resolution(resolution);
  if (same_point(x, y)) return Vector(x.size(), 0.0);
  const Vector l = log_map(phi, x, y);
  const double n = norm(l);
  if (n == 0.0) return Vector(x.size(), 0.0);
  return scaled(l, discretize_geodesic(phi, x, y, resolution).length() / n);
}

double iso_distance(const Diffeomorphism& phi, std::span<const double> x,
                    std::span<const double> y, std::size_t resolution) {
  if (same_point(x, y)) return 0.0;
  return discretize_geodesic(phi, x, y, resolution).length();
}

IsoExpResult iso_exp(const Diffeomorphism& phi, std::span<const double> x,
                     std::span<const double> v, std::size_t resolution,
                     std::size_t max_steps) {
  check_resolution(resolution);
  if (v.size() != x.size()) throw DomainError("iso_exp: dimension mismatch");
  if (!all_finite(v)) throw DomainError("iso_exp: non-finite tangent vector");
  const std::size_t cap = max_steps == 0 ? 100 * resolution : max_steps;
  const double target = norm(v);

  IsoExpResult r;
  IsoExpTrace& tr = r.trace;
  tr.steps.emplace_back(x.begin(), x.end());
  if (target == 0.0) {
    r.point.assign(x.begin(), x.end());
    tr.fraction = 1.0;
    return r;
  }

  const double m = static_cast<double>(resolution);
  Vector z_prev = phi.forward(x);
  Vector z_cur;
  try {
    z_cur = add(z_prev, phi.jvp(x, scaled(v, 1.0 / m)));
    tr.steps.push_back(phi.inverse(z_cur));
  } catch (const OutOfImageError& e) {
    throw IncompleteGeodesicError(std::string("iso_exp: first step left the image: ") +
                                      e.what(), tr);
  }
  tr.step_lengths.push_back(distance_l2(tr.steps[1], tr.steps[0]));
  double covered = tr.step_lengths.back();

  while (covered < target) {
    if (tr.step_lengths.size() >= cap)
      throw StepCapError("iso_exp: step cap " + std::to_string(cap) + " reached after length " +
                             std::to_string(covered) + " of " + std::to_string(target),
                         tr);
    // chi^{k+1} = gamma_{chi^{k-1}, chi^k}(2)
    Vector z_next = lincomb(2.0, phi.forward(tr.steps.back()), -1.0,
                            phi.forward(tr.steps[tr.steps.size() - 2]));
    Vector next;
    try {
      next = phi.inverse(z_next);
    } catch (const OutOfImageError& e) {
      throw IncompleteGeodesicError(
          "iso_exp: geodesic left the image after length " + std::to_string(covered) +
              " of " + std::to_string(target) + ": " + e.what(),
          tr);
    }
    if (!all_finite(next)) throw NumericalError("iso_exp: non-finite step");
    tr.step_lengths.push_back(distance_l2(next, tr.steps.back()));
    covered += tr.step_lengths.back();
    tr.steps.push_back(std::move(next));
  }

  const std::size_t k = tr.steps.size() - 1;
  const double seg = tr.step_lengths.back();
  const double before = covered - seg;
  tr.stop_index = k;
  tr.fraction = std::clamp((target - before) / seg, 0.0, 1.0);
  tr.zeta = (static_cast<double>(k - 1) + tr.fraction) / m;
  r.point = lincomb(1.0 - tr.fraction, tr.steps[k - 1], tr.fraction, tr.steps[k]);
  if (tr.fraction == 1.0) r.point = tr.steps[k];
  return r;
}

Vector iso_parallel_transport(const Diffeomorphism& phi, std::span<const double> x,
                              std::span<const double> y, std::span<const double> v) {
  if (same_point(x, y)) return {v.begin(), v.end()};
  const double a = norm(log_map(phi, x, y));
  const double b = norm(log_map(phi, y, x));
  const Vector p = parallel_transport(phi, x, y, v);
  if (b == 0.0) return p;
  return scaled(p, a / b);
}

Vector rho_id(std::span<const double> w) { return {w.begin(), w.end()}; }
Vector rho_id_inverse(std::span<const double> w) { return {w.begin(), w.end()}; }

Vector rho_iso(const Diffeomorphism& phi, std::span<const double> p,
               std::span<const double> w, std::size_t resolution) {
  return log_map(phi, p, iso_exp(phi, p, w, resolution).point);
}

Vector rho_iso_inverse(const Diffeomorphism& phi, std::span<const double> p,
                       std::span<const double> w, std::size_t resolution) {
  const double n = norm(w);
  if (n == 0.0) return Vector(w.size(), 0.0);
  const Vector y = exp_map(phi, p, w);
  return scaled(w, discretize_geodesic(phi, p, y, resolution).length() / n);
}

}  // namespace isogeo
