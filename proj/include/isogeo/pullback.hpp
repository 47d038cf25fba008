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

// Closed-form Riemannian mappings of the pullback metric (x, y)^phi on R^d.
// Everything reduces to straight lines in latent space.

#include <span>
#include <vector>

#include "isogeo/diffeomorphism.hpp"
#include "isogeo/linalg.hpp"

namespace isogeo {

/// phi^{-1}((1 - t) phi(x) + t phi(y)). Returns x and y exactly at t = 0, 1.
/// t outside [0, 1] extends the geodesic as long as it stays in the image.
Vector geodesic(const Diffeomorphism& phi, std::span<const double> x,
                std::span<const double> y, double t);

/// phi^{-1}(phi(x) + D_x phi[v]).
Vector exp_map(const Diffeomorphism& phi, std::span<const double> x,
               std::span<const double> v);

/// D_{phi(x)} phi^{-1}[phi(y) - phi(x)].
Vector log_map(const Diffeomorphism& phi, std::span<const double> x,
               std::span<const double> y);

/// |phi(x) - phi(y)|_2.
double distance(const Diffeomorphism& phi, std::span<const double> x,
                std::span<const double> y);

/// P_{y<-x} v = D_{phi(y)} phi^{-1}[D_x phi[v]].
Vector parallel_transport(const Diffeomorphism& phi, std::span<const double> x,
                          std::span<const double> y, std::span<const double> v);

/// phi^{-1} of the latent mean of the columns of `points`.
Vector barycentre(const Diffeomorphism& phi, const Matrix& points);

}  // namespace isogeo
