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

#include "isogeo/pullback.hpp"

#include "isogeo/errors.hpp"

namespace isogeo {

Vector geodesic(const Diffeomorphism& phi, std::span<const double> x,
                std::span<const double> y, double t) {
  if (t == 0.0) return {x.begin(), x.end()};
  if (t == 1.0) return {y.begin(), y.end()};
  return phi.inverse(lincomb(1.0 - t, phi.forward(x), t, phi.forward(y)));
}

Vector exp_map(const Diffeomorphism& phi, std::span<const double> x,
               std::span<const double> v) {
  return phi.inverse(add(phi.forward(x), phi.jvp(x, v)));
}

Vector log_map(const Diffeomorphism& phi, std::span<const double> x,
               std::span<const double> y) {
  const Vector zx = phi.forward(x);
  return phi.inverse_jvp(zx, sub(phi.forward(y), zx));
}

double distance(const Diffeomorphism& phi, std::span<const double> x,
                std::span<const double> y) {
  return distance_l2(phi.forward(x), phi.forward(y));
}

Vector parallel_transport(const Diffeomorphism& phi, std::span<const double> x,
                          std::span<const double> y, std::span<const double> v) {
  return phi.inverse_jvp(phi.forward(y), phi.jvp(x, v));
}

Vector barycentre(const Diffeomorphism& phi, const Matrix& points) {
  if (points.cols() == 0) throw DomainError("barycentre: no points");
  if (points.cols() == 1) return points.column(0);
  Vector mean(points.rows(), 0.0);
  for (std::size_t j = 0; j < points.cols(); ++j) {
    const Vector z = phi.forward(points.col(j));
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += z[i];
  }
  for (double& m : mean) m /= static_cast<double>(points.cols());
  return phi.inverse(mean);
}

}  // namespace isogeo
