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

#include "isogeo/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "isogeo/errors.hpp"
#include "isogeo/io.hpp"

namespace isogeo {

void SvgPlot::scatter(const Matrix& points, std::string color, double radius) {
  layers_.push_back({points, std::move(color), radius, false});
}

void SvgPlot::polyline(const Matrix& points, std::string color, double width) {
  layers_.push_back({points, std::move(color), width, true});
}

void SvgPlot::save(const std::filesystem::path& path, int size) const {
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
  double lo_y = lo_x, hi_y = -lo_x;
  for (const auto& l : layers_) {
    if (l.points.rows() < 2) throw ShapeError("svg: points need at least two coordinates");
    for (std::size_t j = 0; j < l.points.cols(); ++j) {
      lo_x = std::min(lo_x, l.points(0, j));
      hi_x = std::max(hi_x, l.points(0, j));
      lo_y = std::min(lo_y, l.points(1, j));
      hi_y = std::max(hi_y, l.points(1, j));
    }
  }
  if (!std::isfinite(lo_x)) lo_x = lo_y = 0.0, hi_x = hi_y = 1.0;
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double margin = 20.0;
  const double scale = (size - 2 * margin) / span;
  auto px = [&](double v) { return format_double(margin + (v - lo_x) * scale); };
  auto py = [&](double v) { return format_double(size - margin - (v - lo_y) * scale); };

  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& l : layers_) {
    if (l.line) {
      out << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\""
          << format_double(l.size) << "\" points=\"";
      for (std::size_t j = 0; j < l.points.cols(); ++j)
        out << (j ? " " : "") << px(l.points(0, j)) << ',' << py(l.points(1, j));
      out << "\"/>\n";
    } else {
      for (std::size_t j = 0; j < l.points.cols(); ++j)
        out << "<circle cx=\"" << px(l.points(0, j)) << "\" cy=\"" << py(l.points(1, j))
            << "\" r=\"" << format_double(l.size) << "\" fill=\"" << l.color << "\"/>\n";
    }
  }
  out << "</svg>\n";
}

void write_pgm_grid(const std::filesystem::path& path, const Matrix& images,
                    const ImageShape& shape, std::size_t per_row) {
  if (shape.channels != 1 || images.rows() != shape.size())
    throw ShapeError("pgm: expected single-channel images matching the shape");
  if (images.cols() == 0 || per_row == 0) throw ShapeError("pgm: nothing to draw");
  const std::size_t tiles_y = (images.cols() + per_row - 1) / per_row;
  const std::size_t w = per_row * shape.width, h = tiles_y * shape.height;
  std::vector<unsigned char> pix(w * h, 0);
  for (std::size_t k = 0; k < images.cols(); ++k) {
    const std::size_t ox = (k % per_row) * shape.width, oy = (k / per_row) * shape.height;
    for (std::size_t r = 0; r < shape.height; ++r)
      for (std::size_t c = 0; c < shape.width; ++c) {
        const double v = std::clamp(images(r * shape.width + c, k), 0.0, 1.0);
        pix[(oy + r) * w + ox + c] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "P5\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(pix.data()), static_cast<std::streamsize>(pix.size()));
}

}  // namespace isogeo
