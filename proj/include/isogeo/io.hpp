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

#include "isogeo/analysis.hpp"
#include "isogeo/linalg.hpp"

namespace isogeo {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// One point per row with header dim_0, ..., dim_{d-1}.
void write_points_csv(const std::filesystem::path& path, const Matrix& points);
/// Inverse of write_points_csv; FormatError on malformed input.
Matrix read_points_csv(const std::filesystem::path& path);

/// Header dist_to_barycentre,value.
void write_point_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace isogeo
