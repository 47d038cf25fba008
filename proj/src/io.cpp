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

#include "isogeo/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "isogeo/errors.hpp"

namespace isogeo {

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_points_csv(const std::filesystem::path& path, const Matrix& points) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (std::size_t i = 0; i < points.rows(); ++i) out << (i ? "," : "") << "dim_" << i;
  out << '\n';
  for (std::size_t j = 0; j < points.cols(); ++j) {
    for (std::size_t i = 0; i < points.rows(); ++i)
      out << (i ? "," : "") << format_double(points(i, j));
    out << '\n';
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) f.push_back(cur);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  return f;
}

}  // namespace

Matrix read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);
  const std::size_t d = header.size();
  for (std::size_t i = 0; i < d; ++i)
    if (header[i] != "dim_" + std::to_string(i))
      throw FormatError(path.string() + ": header column " + std::to_string(i) +
                        " should be dim_" + std::to_string(i));
  std::vector<double> vals;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != d)
      throw FormatError(path.string() + ": line " + std::to_string(row) + " has " +
                        std::to_string(f.size()) + " fields, expected " + std::to_string(d));
    for (const auto& s : f) {
      double v = 0.0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw FormatError(path.string() + ": line " + std::to_string(row) + ": bad number '" +
                          s + "'");
      vals.push_back(v);
    }
  }
  const std::size_t n = d == 0 ? 0 : vals.size() / d;
  if (n == 0) throw FormatError(path.string() + ": no data rows");
  Matrix m(d, n);
  std::copy(vals.begin(), vals.end(), m.data().begin());
  return m;
}

void write_point_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "dist_to_barycentre,value\n";
  for (std::size_t i = 0; i < cloud.distance.size(); ++i)
    out << format_double(cloud.distance[i]) << ',' << format_double(cloud.value[i]) << '\n';
  if (!out) throw FormatError("write failed for " + path.string());
}

}  // namespace isogeo
