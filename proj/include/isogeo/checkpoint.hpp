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

#include <json.hpp>

#include "isogeo/flow.hpp"

namespace isogeo {

inline constexpr int kCheckpointFormatVersion = 1;

nlohmann::json flow_config_to_json(const FlowConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
FlowConfig flow_config_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const FlowModel& model);
FlowModel checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const FlowModel& model, const std::filesystem::path& path);
FlowModel load_checkpoint(const std::filesystem::path& path);

/// Reads a JSON file; FormatError on I/O or parse failure.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace isogeo
