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

// Isometrized mappings: geodesics reparametrized to constant l2 speed and the
// matching log, exp, distance and parallel transport. All of them work on a
// discretized geodesic with M segments.

#include <cstddef>
#include <span>
#include <vector>

#include "isogeo/diffeomorphism.hpp"
#include "isogeo/errors.hpp"
#include "isogeo/linalg.hpp"

namespace isogeo {

inline constexpr std::size_t kDefaultResolution = 100;

/// M + 1 samples gamma(k / M) of a pullback geodesic with cumulative l2
/// lengths S_0 = 0 <= S_1 <= ... <= S_M.
struct DiscreteGeodesic {
  std::size_t resolution = 0;
  Vector latent_from;
  Vector latent_to;
  std::vector<Vector> points;
  Vector cumulative;

  double length() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  /// Geodesic parameter at which the discrete curve has covered t * S_M.
  double time_change(double t) const;
};

DiscreteGeodesic discretize_geodesic(const Diffeomorphism& phi, std::span<const double> x,
                                     std::span<const double> y,
                                     std::size_t resolution = kDefaultResolution);

double time_change(const DiscreteGeodesic& g, double t);

/// gamma(tau(t)) on a previously discretized geodesic.
Vector iso_geodesic(const Diffeomorphism& phi, const DiscreteGeodesic& g, double t);
Vector iso_geodesic(const Diffeomorphism& phi, std::span<const double> x,
                    std::span<const double> y, double t,
                    std::size_t resolution = kDefaultResolution);

Vector iso_log(const Diffeomorphism& phi, std::span<const double> x,
               std::span<const double> y, std::size_t resolution = kDefaultResolution);

double iso_distance(const Diffeomorphism& phi, std::span<const double> x,
                    std::span<const double> y, std::size_t resolution = kDefaultResolution);

struct IsoExpTrace {
  std::vector<Vector> steps;  ///< chi^0 .. chi^K
  Vector step_lengths;        ///< |chi^k - chi^{k-1}|, k = 1..K
  std::size_t stop_index = 0; ///< K
  double fraction = 0.0;      ///< position inside the last segment, in (0, 1]
  double zeta = 0.0;          ///< geodesic parameter consumed, (K - 1 + fraction) / M
};

struct IsoExpResult {
  Vector point;
  IsoExpTrace trace;
};

/// The stepping left the image of phi before covering |v|.
class IncompleteGeodesicError : public OutOfImageError {
 public:
  IncompleteGeodesicError(const std::string& what, IsoExpTrace trace)
      : OutOfImageError(what), trace_(std::move(trace)) {}
  const IsoExpTrace& trace() const { return trace_; }

 private:
  IsoExpTrace trace_;
};

/// The stepping hit the step cap before covering |v|.
class StepCapError : public NumericalError {
 public:
  StepCapError(const std::string& what, IsoExpTrace trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const IsoExpTrace& trace() const { return trace_; }

 private:
  IsoExpTrace trace_;
};

/// Walks the geodesic through x with initial direction v in steps of
/// parameter 1/M until the l2 length |v| is covered. max_steps = 0 means
/// 100 * M.
IsoExpResult iso_exp(const Diffeomorphism& phi, std::span<const double> x,
                     std::span<const double> v, std::size_t resolution = kDefaultResolution,
                     std::size_t max_steps = 0);

/// (|log_x y| / |log_y x|) P_{y<-x} v; v itself when x == y.
Vector iso_parallel_transport(const Diffeomorphism& phi, std::span<const double> x,
                              std::span<const double> y, std::span<const double> v);

Vector rho_id(std::span<const double> w);
Vector rho_id_inverse(std::span<const double> w);
/// log_p(iso_exp_p(w)).
Vector rho_iso(const Diffeomorphism& phi, std::span<const double> p,
               std::span<const double> w, std::size_t resolution = kDefaultResolution);
/// iso_log_p(exp_p(w)) = (L(w) / |w|) w.
Vector rho_iso_inverse(const Diffeomorphism& phi, std::span<const double> p,
                       std::span<const double> w,
                       std::size_t resolution = kDefaultResolution);

}  // namespace isogeo
