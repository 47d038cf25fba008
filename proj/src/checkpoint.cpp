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

#include "isogeo/checkpoint.hpp"

#include <fstream>
#include <set>
#include <string>

#include "isogeo/errors.hpp"

namespace isogeo {

namespace {

const char* kind_name(DataKind k) { return k == DataKind::Vector ? "vector" : "image"; }

const char* coupling_name(CouplingNetKind k) {
  switch (k) {
    case CouplingNetKind::FixedFilter: return "fixed_filter";
    case CouplingNetKind::FeedForward: return "feed_forward";
    case CouplingNetKind::Conv: return "conv";
  }
  return "?";
}

template <class T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("flow config: bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

nlohmann::json flow_config_to_json(const FlowConfig& c) {
  return {
      {"kind", kind_name(c.kind)},
      {"dim", c.dim},
      {"image", {{"channels", c.image.channels}, {"height", c.image.height},
                 {"width", c.image.width}}},
      {"blocks", c.blocks},
      {"activation_order", c.activation_order},
      {"coupling", coupling_name(c.coupling)},
      {"fixed_filter", c.fixed_filter},
      {"hidden", c.hidden},
      {"kernel_size", c.kernel_size},
      {"linear_kernel_size", c.linear_kernel_size},
      {"householder_reflections", c.householder_reflections},
      {"actnorm_data_init", c.actnorm_data_init},
      {"init_scale", c.init_scale},
  };
}

FlowConfig flow_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("flow config must be a JSON object");
  static const std::set<std::string> known{
      "kind", "dim", "image", "blocks", "activation_order", "coupling", "fixed_filter",
      "hidden", "kernel_size", "linear_kernel_size", "householder_reflections",
      "actnorm_data_init", "init_scale"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("flow config: unknown key '" + key + "'");

  FlowConfig c;
  if (j.contains("kind")) {
    const auto k = get_as<std::string>(j, "kind");
    if (k == "vector") c.kind = DataKind::Vector;
    else if (k == "image") c.kind = DataKind::Image;
    else throw ConfigError("flow config: kind must be 'vector' or 'image'");
  }
  if (j.contains("dim")) c.dim = get_as<std::size_t>(j, "dim");
  if (j.contains("image")) {
    const auto& im = j.at("image");
    if (!im.is_object()) throw ConfigError("flow config: image must be an object");
    for (const auto& [key, _] : im.items())
      if (key != "channels" && key != "height" && key != "width")
        throw ConfigError("flow config: unknown image key '" + key + "'");
    if (im.contains("channels")) c.image.channels = get_as<std::size_t>(im, "channels");
    if (im.contains("height")) c.image.height = get_as<std::size_t>(im, "height");
    if (im.contains("width")) c.image.width = get_as<std::size_t>(im, "width");
  }
  if (j.contains("blocks")) c.blocks = get_as<int>(j, "blocks");
  if (j.contains("activation_order")) c.activation_order = get_as<int>(j, "activation_order");
  if (j.contains("coupling")) {
    const auto k = get_as<std::string>(j, "coupling");
    if (k == "fixed_filter") c.coupling = CouplingNetKind::FixedFilter;
    else if (k == "feed_forward") c.coupling = CouplingNetKind::FeedForward;
    else if (k == "conv") c.coupling = CouplingNetKind::Conv;
    else throw ConfigError("flow config: coupling must be fixed_filter, feed_forward or conv");
  }
  if (j.contains("fixed_filter")) c.fixed_filter = get_as<std::vector<double>>(j, "fixed_filter");
  if (j.contains("hidden")) c.hidden = get_as<std::vector<std::size_t>>(j, "hidden");
  if (j.contains("kernel_size")) c.kernel_size = get_as<std::size_t>(j, "kernel_size");
  if (j.contains("linear_kernel_size"))
    c.linear_kernel_size = get_as<std::size_t>(j, "linear_kernel_size");
  if (j.contains("householder_reflections"))
    c.householder_reflections = get_as<int>(j, "householder_reflections");
  if (j.contains("actnorm_data_init"))
    c.actnorm_data_init = get_as<bool>(j, "actnorm_data_init");
  if (j.contains("init_scale")) c.init_scale = get_as<double>(j, "init_scale");
  c.validate();
  return c;
}

nlohmann::json checkpoint_to_json(const FlowModel& model) {
  nlohmann::json params = nlohmann::json::object();
  const auto values = model.params().values();
  for (const auto& b : model.params().layout())
    params[b.name] = std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(b.offset),
                                         values.begin() +
                                             static_cast<std::ptrdiff_t>(b.offset + b.length));
  return {
      {"format_version", kCheckpointFormatVersion},
      {"config", flow_config_to_json(model.config())},
      {"params", params},
      {"actnorm_initialized", model.actnorm_initialized()},
      {"seed", model.seed()},
  };
}

FlowModel checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw FormatError("checkpoint must be a JSON object");
    if (j.at("format_version").get<int>() != kCheckpointFormatVersion)
      throw FormatError("checkpoint: unsupported format_version");
    FlowModel model(flow_config_from_json(j.at("config")));
    const auto& params = j.at("params");
    if (!params.is_object()) throw FormatError("checkpoint: params must be an object");
    for (const auto& [key, _] : params.items())
      if (model.params().find(key) == nullptr)
        throw FormatError("checkpoint: unexpected parameter block '" + key + "'");
    for (const auto& b : model.params().layout()) {
      if (!params.contains(b.name))
        throw FormatError("checkpoint: missing parameter block '" + b.name + "'");
      const auto v = params.at(b.name).get<std::vector<double>>();
      if (v.size() != b.length)
        throw FormatError("checkpoint: block '" + b.name + "' has " + std::to_string(v.size()) +
                          " values, expected " + std::to_string(b.length));
      auto dst = model.params().block(b.name);
      std::copy(v.begin(), v.end(), dst.begin());
    }
    if (!all_finite(model.params().values()))
      throw FormatError("checkpoint: non-finite parameter");
    model.set_actnorm_initialized(j.at("actnorm_initialized").get<bool>());
    model.set_seed(j.at("seed").get<std::uint64_t>());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("write failed for " + path.string());
}

void save_checkpoint(const FlowModel& model, const std::filesystem::path& path) {
  write_json_file(checkpoint_to_json(model), path);
}

FlowModel load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_json_file(path));
}

}  // namespace isogeo
