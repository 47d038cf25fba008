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

#include "isogeo/datasets.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "isogeo/diffeomorphism.hpp"
#include "isogeo/errors.hpp"

namespace isogeo {

Matrix sample_bimodal_gaussian(std::size_t n, std::uint64_t seed, const BimodalParams& params) {
  if (n == 0) throw ConfigError("sample size must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  constexpr double r = ModeledDoubleGaussian::kRot;
  Matrix x(2, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double centre = coin(rng) ? params.separation : -params.separation;
    const double s = centre + params.sigma_along * normal(rng);
    const double off = params.sigma_normal * normal(rng);
    const double y1 = off + ModeledDoubleGaussian::h(s);
    const double y2 = s;
    x(0, i) = r * (y1 + y2);
    x(1, i) = r * (y2 - y1);
  }
  return x;
}

Matrix sample_hemisphere(std::size_t n, std::uint64_t seed, double noise_sigma) {
  if (n == 0) throw ConfigError("sample size must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(3, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 3> g{};
    double len = 0.0;
    while (len < 1e-12) {
      for (double& e : g) e = normal(rng);
      len = norm(g);
    }
    for (std::size_t k = 0; k < 3; ++k) x(k, i) = g[k] / len;
    x(2, i) = std::abs(x(2, i));
    if (noise_sigma > 0.0)
      for (std::size_t k = 0; k < 3; ++k) x(k, i) += noise_sigma * normal(rng);
  }
  return x;
}

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

}  // namespace

MnistData load_mnist_idx(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path, std::size_t limit) {
  const auto img = read_all(images_path);
  if (img.size() < 16) throw FormatError(images_path.string() + ": truncated IDX header");
  if (be32(img, 0) != 2051)
    throw FormatError(images_path.string() + ": bad magic " + std::to_string(be32(img, 0)) +
                      " (expected 2051)");
  const std::size_t count = be32(img, 4), rows = be32(img, 8), cols = be32(img, 12);
  const std::size_t pix = rows * cols;
  if (img.size() < 16 + count * pix)
    throw FormatError(images_path.string() + ": truncated image data");

  MnistData out;
  out.rows = rows;
  out.cols = cols;
  std::size_t n = limit == 0 ? count : std::min(count, limit);

  if (!labels_path.empty()) {
    const auto lab = read_all(labels_path);
    if (lab.size() < 8) throw FormatError(labels_path.string() + ": truncated IDX header");
    if (be32(lab, 0) != 2049)
      throw FormatError(labels_path.string() + ": bad magic " + std::to_string(be32(lab, 0)) +
                        " (expected 2049)");
    const std::size_t lcount = be32(lab, 4);
    if (lcount != count)
      throw FormatError("image count " + std::to_string(count) + " does not match label count " +
                        std::to_string(lcount));
    if (lab.size() < 8 + lcount) throw FormatError(labels_path.string() + ": truncated labels");
    out.labels.assign(lab.begin() + 8, lab.begin() + 8 + static_cast<std::ptrdiff_t>(n));
  }

  out.images = Matrix(pix, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < pix; ++k)
      out.images(k, i) = static_cast<double>(img[16 + i * pix + k]) / 255.0;
  return out;
}

Split train_validation_split(std::size_t n, std::size_t validation, std::uint64_t seed) {
  if (validation > n) throw ConfigError("validation size exceeds data size");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  Split s;
  s.validation.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(validation));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(validation), perm.end());
  return s;
}

}  // namespace isogeo
