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

#include <filesystem>
#include <string>
#include <vector>

#include "isogeo/diffeomorphism.hpp"
#include "isogeo/linalg.hpp"

namespace isogeo {

/// Minimal 2D plot: scatter layers and polylines, autoscaled to the data.
/// Points of higher dimension are drawn by their first two coordinates.
class SvgPlot {
 public:
  void scatter(const Matrix& points, std::string color, double radius = 2.0);
  void polyline(const Matrix& points, std::string color, double width = 1.5);
  void save(const std::filesystem::path& path, int size = 600) const;

 private:
  struct Layer {
    Matrix points;
    std::string color;
    double size;
    bool line;
  };
  std::vector<Layer> layers_;
};

/// Images (one per column, shape c x h x w with c = 1) tiled into a binary
/// PGM, `per_row` tiles per row. Values are clamped to [0, 1].
void write_pgm_grid(const std::filesystem::path& path, const Matrix& images,
                    const ImageShape& shape, std::size_t per_row);

}  // namespace isogeo
