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

// Command-line front end: sample, train, geodesic, lowrank, metrics.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "isogeo/analysis.hpp"
#include "isogeo/checkpoint.hpp"
#include "isogeo/datasets.hpp"
#include "isogeo/diffeomorphism.hpp"
#include "isogeo/io.hpp"
#include "isogeo/iso.hpp"
#include "isogeo/pullback.hpp"
#include "isogeo/svg.hpp"
#include "isogeo/training.hpp"

namespace fs = std::filesystem;
using namespace isogeo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct ModelFlags {
  std::string checkpoint;
  bool modeled = false;
  std::size_t identity = 0;

  void add(CLI::App* app) {
    auto* c = app->add_option("--checkpoint", checkpoint, "Flow checkpoint JSON");
    auto* m = app->add_flag("--modeled", modeled, "Use the modeled double-Gaussian pullback");
    auto* i = app->add_option("--identity", identity, "Use the identity map in this dimension");
    c->excludes(m)->excludes(i);
    m->excludes(i);
  }

  std::unique_ptr<Diffeomorphism> load() const {
    if (!checkpoint.empty()) {
      auto model = std::make_unique<FlowModel>(load_checkpoint(checkpoint));
      if (!model->actnorm_initialized())
        throw StateError("checkpoint has uninitialized actnorm layers");
      return model;
    }
    if (modeled) return std::make_unique<ModeledDoubleGaussian>();
    if (identity > 0) return std::make_unique<IdentityDiffeo>(identity);
    throw ConfigError("one of --checkpoint, --modeled or --identity is required");
  }
};

Vector parse_point(const std::string& s) {
  Vector v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad coordinate '" + item + "' in '" + s + "'");
    }
  }
  if (v.empty()) throw ConfigError("empty point");
  return v;
}

bool is_idx(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  unsigned char b[4] = {0, 0, 0, 0};
  in.read(reinterpret_cast<char*>(b), 4);
  return in && b[0] == 0 && b[1] == 0 && b[2] == 8 && b[3] == 3;
}

Matrix load_data(const std::string& path, std::size_t limit) {
  if (path.empty()) throw ConfigError("--data is required");
  if (is_idx(path)) return load_mnist_idx(path, "", limit).images;
  Matrix m = read_points_csv(path);
  if (limit > 0 && limit < m.cols()) m = m.columns(0, limit);
  return m;
}

void check_dim(const Diffeomorphism& phi, std::size_t d) {
  if (phi.dim() != d)
    throw ShapeError("model dimension " + std::to_string(phi.dim()) +
                     " does not match data dimension " + std::to_string(d));
}

Vector base_point(const Diffeomorphism& phi, const Matrix& x, const std::string& base) {
  if (base.empty()) return barycentre(phi, x);
  Vector p = parse_point(base);
  check_dim(phi, p.size());
  return p;
}

void print_error(const char* kind, const std::string& msg,
                 const std::vector<std::size_t>& indices = {}) {
  nlohmann::json j{{"error", kind}, {"message", msg}};
  if (!indices.empty()) j["indices"] = indices;
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isometrized pullback geometry from constant-determinant flows"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads")->capture_default_str();

  // sample
  auto* sample = app.add_subcommand("sample", "Generate a synthetic data set as CSV");
  std::string dataset = "bimodal";
  std::size_t n = 1000;
  double noise = 0.0;
  std::string out;
  sample->add_option("--dataset", dataset, "bimodal | hemisphere")
      ->check(CLI::IsMember({"bimodal", "hemisphere"}));
  sample->add_option("--n", n, "Number of points")->capture_default_str();
  sample->add_option("--noise", noise, "Hemisphere noise sigma");
  sample->add_option("--out", out, "Output CSV")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Fit a flow to data");
  std::string config_path, data_path, report_path;
  std::size_t limit = 0;
  train_cmd->add_option("--config", config_path, "Training config JSON")->required();
  train_cmd->add_option("--data", data_path, "Data CSV or IDX image file")->required();
  train_cmd->add_option("--limit", limit, "Use at most this many points");
  train_cmd->add_option("--out", out, "Checkpoint output")->required();
  train_cmd->add_option("--report", report_path, "Training report JSON");
  bool quiet = false;
  train_cmd->add_flag("--quiet", quiet, "No per-epoch progress on stderr");

  // geodesic
  auto* geo = app.add_subcommand("geodesic", "Sample a (iso-)geodesic");
  ModelFlags geo_model;
  geo_model.add(geo);
  std::string from, to, svg_path, pgm_path;
  std::size_t from_index = 0, to_index = 1, steps = 10, resolution = kDefaultResolution;
  bool iso = false;
  geo->add_option("--from", from, "Start point, comma separated");
  geo->add_option("--to", to, "End point, comma separated");
  geo->add_option("--data", data_path, "Take endpoints from this data file");
  geo->add_option("--from-index", from_index, "Start column in --data");
  geo->add_option("--to-index", to_index, "End column in --data");
  geo->add_option("--steps", steps, "Number of segments")->capture_default_str();
  geo->add_flag("--iso", iso, "Constant l2-speed reparametrization");
  geo->add_option("-M,--resolution", resolution, "Geodesic discretization")
      ->capture_default_str();
  geo->add_option("--out", out, "Output CSV")->required();
  geo->add_option("--svg", svg_path, "Optional SVG overlay (d = 2 or 3)");
  geo->add_option("--pgm", pgm_path, "Optional PGM strip for image data");

  // lowrank
  auto* lowrank = app.add_subcommand("lowrank", "Tangent-space rank-r approximation");
  ModelFlags lr_model;
  lr_model.add(lowrank);
  std::size_t rank = 1;
  std::string variant = "iso", out_report, base;
  lowrank->add_option("--data", data_path, "Data CSV or IDX")->required();
  lowrank->add_option("--limit", limit, "Use at most this many points");
  lowrank->add_option("--rank", rank, "Rank r")->capture_default_str();
  lowrank->add_option("--variant", variant, "plain | iso")
      ->check(CLI::IsMember({"plain", "iso"}))
      ->capture_default_str();
  lowrank->add_option("-M,--resolution", resolution, "Geodesic discretization")
      ->capture_default_str();
  lowrank->add_option("--base", base, "Base point (default: barycentre)");
  lowrank->add_option("--out-recon", out, "Reconstructions CSV")->required();
  lowrank->add_option("--out-report", out_report, "Metrics JSON")->required();

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Full metrics report");
  ModelFlags mt_model;
  mt_model.add(metrics);
  std::size_t m = 100;
  std::string geo_cloud, rec_cloud;
  metrics->add_option("--data", data_path, "Data CSV or IDX")->required();
  metrics->add_option("--limit", limit, "Use at most this many points");
  metrics->add_option("--rank", rank, "Rank r")->capture_default_str();
  metrics->add_option("--m", m, "Geodesic samples for the rel-RMSE")->capture_default_str();
  metrics->add_option("-M,--resolution", resolution, "Geodesic discretization")
      ->capture_default_str();
  metrics->add_option("--base", base, "Base point (default: barycentre)");
  metrics->add_option("--out", out, "MetricsReport JSON")->required();
  metrics->add_option("--geodesic-cloud", geo_cloud, "Cloud CSV (default: next to --out)");
  metrics->add_option("--reconstruction-cloud", rec_cloud,
                      "Cloud CSV (default: next to --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  }

  try {
    if (*sample) {
      const Matrix x = dataset == "bimodal" ? sample_bimodal_gaussian(n, seed)
                                            : sample_hemisphere(n, seed, noise);
      write_points_csv(out, x);
    } else if (*train_cmd) {
      TrainConfig cfg = train_config_from_json(read_json_file(config_path));
      if (app.get_option("--seed")->count() > 0) cfg.seed = seed;
      if (app.get_option("--threads")->count() > 0) cfg.threads = threads;
      const Matrix x = load_data(data_path, limit);
      if (x.rows() != cfg.flow.data_dim())
        throw ShapeError("config expects dimension " + std::to_string(cfg.flow.data_dim()) +
                         ", data has " + std::to_string(x.rows()));
      FlowModel model = build_flow(cfg.flow, cfg.seed);
      TrainReport rep = train(model, x, cfg, [&](int epoch, double nll_v, double loss) {
        if (!quiet)
          std::fprintf(stderr, "epoch %d  nll %.6f  loss %.6f\n", epoch, nll_v, loss);
      });
      save_checkpoint(model, out);
      rep.checkpoint_path = out;
      if (!report_path.empty()) {
        nlohmann::json j = rep.to_json();
        j["config"] = train_config_to_json(cfg);
        write_json_file(j, report_path);
      }
    } else if (*geo) {
      auto phi = geo_model.load();
      Vector a, b;
      if (!data_path.empty()) {
        const Matrix x = load_data(data_path, 0);
        if (from_index >= x.cols() || to_index >= x.cols())
          throw ConfigError("endpoint index out of range");
        a = x.column(from_index);
        b = x.column(to_index);
      } else {
        if (from.empty() || to.empty()) throw ConfigError("--from and --to (or --data) required");
        a = parse_point(from);
        b = parse_point(to);
      }
      check_dim(*phi, a.size());
      check_dim(*phi, b.size());
      if (steps < 1) throw ConfigError("--steps must be >= 1");
      std::vector<Vector> pts;
      std::optional<DiscreteGeodesic> g;
      if (iso) g = discretize_geodesic(*phi, a, b, resolution);
      for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(steps);
        pts.push_back(iso ? iso_geodesic(*phi, *g, t) : geodesic(*phi, a, b, t));
        if (!all_finite(pts.back())) throw NumericalError("non-finite geodesic point");
      }
      const Matrix curve = Matrix::from_columns(pts);
      write_points_csv(out, curve);
      if (!svg_path.empty()) {
        if (a.size() != 2 && a.size() != 3) throw ShapeError("--svg needs d = 2 or 3");
        SvgPlot plot;
        plot.polyline(curve, iso ? "#c0392b" : "#2c3e50");
        plot.scatter(Matrix::from_columns({a, b}), "#000000", 4.0);
        plot.save(svg_path);
      }
      if (!pgm_path.empty()) {
        const auto shape = phi->image_shape();
        if (!shape) throw ShapeError("--pgm needs an image model");
        write_pgm_grid(pgm_path, curve, *shape, curve.cols());
      }
    } else if (*lowrank) {
      auto phi = lr_model.load();
      const Matrix x = load_data(data_path, limit);
      check_dim(*phi, x.rows());
      const Vector p = base_point(*phi, x, base);
      RankROptions opts{resolution, threads};
      const RankRResult r = tangent_rank_r(*phi, x, p, rank, variant_from_string(variant), opts);
      write_points_csv(out, r.reconstructions);
      nlohmann::json j{{"variant", variant},
                       {"rank", rank},
                       {"resolution", resolution},
                       {"points", x.cols()},
                       {"base_point", p},
                       {"singular_values", r.svd.sigma},
                       {"low_rank_rel_rmse", low_rank_rel_rmse(x, r.reconstructions, p)}};
      write_json_file(j, out_report);
    } else if (*metrics) {
      auto phi = mt_model.load();
      const Matrix x = load_data(data_path, limit);
      check_dim(*phi, x.rows());
      const Vector p = base_point(*phi, x, base);
      RankROptions opts{resolution, threads};
      const MetricsResult r = compute_metrics(*phi, x, p, rank, m, opts);
      write_json_file(r.report.to_json(), out);
      const fs::path stem = fs::path(out).replace_extension();
      write_point_cloud_csv(geo_cloud.empty() ? stem.string() + "_geodesic_cloud.csv" : geo_cloud,
                            r.report.clouds.geodesic);
      write_point_cloud_csv(
          rec_cloud.empty() ? stem.string() + "_reconstruction_cloud.csv" : rec_cloud,
          r.report.clouds.reconstruction);
    }
  } catch (const ColumnError& e) {
    print_error("numerical", e.what(), e.indices());
    return kExitNumerical;
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return kExitUsage;
  } catch (const StateError& e) {
    print_error("state", e.what());
    return kExitUsage;
  } catch (const FormatError& e) {
    print_error("format", e.what());
    return kExitData;
  } catch (const ShapeError& e) {
    print_error("shape", e.what());
    return kExitData;
  } catch (const DomainError& e) {
    print_error("domain", e.what());
    return kExitData;
  } catch (const OutOfImageError& e) {
    print_error("out_of_image", e.what());
    return kExitNumerical;
  } catch (const NumericalError& e) {
    print_error("numerical", e.what());
    return kExitNumerical;
  } catch (const DegenerateError& e) {
    print_error("degenerate", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
