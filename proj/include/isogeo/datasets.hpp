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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "isogeo/linalg.hpp"

namespace isogeo {

/// Two equal-weight Gaussian modes lying along the bent curve of the modeled
/// double-Gaussian diffeomorphism. In rotated coordinates y = R x a sample is
/// (n + h(s), s) with s ~ N(+-separation, sigma_along^2) and
/// n ~ N(0, sigma_normal^2).
struct BimodalParams {
  double separation = 2.0;
  double sigma_along = 0.6;
  double sigma_normal = 0.1;
};

/// 2 x n, one point per column; deterministic per seed.
Matrix sample_bimodal_gaussian(std::size_t n, std::uint64_t seed,
                               const BimodalParams& params = {});

/// Uniform samples on the upper unit hemisphere in R^3, plus optional
/// isotropic Gaussian noise. 3 x n.
Matrix sample_hemisphere(std::size_t n, std::uint64_t seed, double noise_sigma = 0.0);

struct MnistData {
  Matrix images;  ///< 784 x n, pixels scaled to [0, 1]
  std::vector<std::uint8_t> labels;
  std::size_t rows = 28;
  std::size_t cols = 28;
};

/// Reads IDX image (magic 2051) and, when labels_path is non-empty, label
/// (magic 2049) files. At most `limit` items are loaded (0 = all).
MnistData load_mnist_idx(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path, std::size_t limit = 0);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Seeded permutation of 0..n-1; the first `validation` entries form the
/// validation set.
Split train_validation_split(std::size_t n, std::size_t validation, std::uint64_t seed);

}  // namespace isogeo
