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

#include "isogeo/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "isogeo/checkpoint.hpp"
#include "isogeo/parallel.hpp"

namespace isogeo {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
  if (!(weight_decay >= 0.0)) throw ConfigError("train config: weight_decay must be >= 0");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("train config: learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ConfigError("train config: betas must lie in [0, 1)");
  if (!(adam.eps > 0.0)) throw ConfigError("train config: eps must be > 0");
  flow.validate();
}

TrainConfig TrainConfig::double_gaussian() {
  TrainConfig c;
  c.epochs = 500;
  c.batch_size = 16;
  c.weight_decay = 0.2;
  c.flow = FlowConfig::double_gaussian();
  return c;
}

TrainConfig TrainConfig::hemisphere() {
  TrainConfig c;
  c.epochs = 500;
  c.batch_size = 16;
  c.weight_decay = 0.02;
  c.flow = FlowConfig::hemisphere();
  return c;
}

TrainConfig TrainConfig::mnist_reduced() {
  TrainConfig c;
  c.epochs = 5;
  c.batch_size = 128;
  c.weight_decay = 0.0;
  c.flow = FlowConfig::mnist_reduced();
  return c;
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"weight_decay", c.weight_decay},
      {"adam", {{"learning_rate", c.adam.learning_rate},
                {"beta1", c.adam.beta1},
                {"beta2", c.adam.beta2},
                {"eps", c.adam.eps}}},
      {"seed", c.seed},
      {"threads", c.threads},
      {"dataset", c.dataset},
      {"flow", flow_config_to_json(c.flow)},
  };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  static const std::set<std::string> known{"epochs", "batch_size", "weight_decay", "adam",
                                           "seed", "threads", "dataset", "flow", "preset"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("train config: unknown key '" + key + "'");
  TrainConfig c;
  try {
    if (j.contains("preset")) {
      const auto p = j.at("preset").get<std::string>();
      if (p == "double_gaussian") c = TrainConfig::double_gaussian();
      else if (p == "hemisphere") c = TrainConfig::hemisphere();
      else if (p == "mnist_reduced") c = TrainConfig::mnist_reduced();
      else throw ConfigError("train config: unknown preset '" + p + "'");
    }
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("weight_decay")) c.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("adam")) {
      const auto& a = j.at("adam");
      for (const auto& [key, _] : a.items())
        if (key != "learning_rate" && key != "beta1" && key != "beta2" && key != "eps")
          throw ConfigError("train config: unknown adam key '" + key + "'");
      if (a.contains("learning_rate")) c.adam.learning_rate = a.at("learning_rate").get<double>();
      if (a.contains("beta1")) c.adam.beta1 = a.at("beta1").get<double>();
      if (a.contains("beta2")) c.adam.beta2 = a.at("beta2").get<double>();
      if (a.contains("eps")) c.adam.eps = a.at("eps").get<double>();
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<std::size_t>();
    if (j.contains("dataset")) c.dataset = j.at("dataset").get<std::string>();
    if (j.contains("flow")) {
      // Keys given here override the preset's flow config.
      nlohmann::json merged = flow_config_to_json(c.flow);
      for (const auto& [key, val] : j.at("flow").items()) merged[key] = val;
      c.flow = flow_config_from_json(merged);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

double nll(const Diffeomorphism& phi, std::span<const double> x) {
  const Vector z = phi.forward(x);
  const double d = static_cast<double>(x.size());
  return 0.5 * d * std::log(2.0 * std::numbers::pi) + 0.5 * dot(z, z) - phi.log_abs_det(x);
}

double mean_nll(const Diffeomorphism& phi, const Matrix& data, std::size_t threads) {
  if (data.cols() == 0) throw DomainError("mean_nll: no data");
  Vector per(data.cols());
  parallel_for(data.cols(), threads, [&](std::size_t i) { per[i] = nll(phi, data.col(i)); });
  return std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(data.cols());
}

LossAndGrad loss_and_grad(const FlowModel& model, const Matrix& batch, double lambda,
                          std::size_t threads) {
  if (batch.cols() == 0) throw DomainError("loss_and_grad: empty batch");
  if (batch.rows() != model.dim()) throw DomainError("loss_and_grad: dimension mismatch");
  const std::size_t n = batch.cols();
  const std::size_t np = model.params().size();
  const double d = static_cast<double>(model.dim());
  const double c0 = 0.5 * d * std::log(2.0 * std::numbers::pi);

  LossAndGrad out;
  out.grad.assign(np, 0.0);
  Vector nlls(n);
  auto sample = [&](std::size_t i) {
    FlowTape tape = model.record(batch.col(i));
    nlls[i] = c0 + 0.5 * dot(tape.output, tape.output) - tape.log_abs_det;
    return model.backward(tape, tape.output, -1.0).params;
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      const Vector g = sample(i);
      for (std::size_t k = 0; k < np; ++k) out.grad[k] += g[k];
    }
  } else {
    std::vector<Vector> slots(n);
    parallel_for(n, threads, [&](std::size_t i) { slots[i] = sample(i); });
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < np; ++k) out.grad[k] += slots[i][k];
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& g : out.grad) g *= inv;
  double sum = 0.0;
  for (double v : nlls) sum += v;
  out.mean_nll = sum * inv;

  const auto theta = model.params().values();
  out.weight_decay_term = 0.5 * lambda * dot(theta, theta);
  if (lambda != 0.0)
    for (std::size_t k = 0; k < np; ++k) out.grad[k] += lambda * theta[k];
  out.loss = out.mean_nll + out.weight_decay_term;
  return out;
}

void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> grad,
               const AdamConfig& cfg) {
  if (state.m.size() != params.size() || state.v.size() != params.size() ||
      grad.size() != params.size())
    throw ShapeError("adam_step: size mismatch");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * grad[k];
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
    const double mh = state.m[k] / bc1;
    const double vh = state.v[k] / bc2;
    params[k] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.eps);
  }
}

nlohmann::json TrainReport::to_json() const {
  return {
      {"initial_nll", initial_nll},
      {"epoch_nll", epoch_nll},
      {"epoch_weight_decay", epoch_weight_decay},
      {"epoch_loss", epoch_loss},
      {"seconds", seconds},
      {"checkpoint", checkpoint_path},
      {"adam", {{"learning_rate", adam.learning_rate},
                {"beta1", adam.beta1},
                {"beta2", adam.beta2},
                {"eps", adam.eps}}},
  };
}

namespace {

std::string first_bad_block(const FlowModel& model, std::span<const double> v) {
  for (const auto& b : model.params().layout())
    if (!all_finite(v.subspan(b.offset, b.length))) return b.name;
  return "";
}

}  // namespace

TrainReport train(FlowModel& model, const Matrix& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.cols() == 0) throw DomainError("train: no data");
  if (data.rows() != model.dim()) throw DomainError("train: data dimension does not match model");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = data.cols();
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  report.adam = cfg.adam;
  OptimizerState state(model.params().size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double nll_sum = 0.0, wd_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t lo = 0; lo < n; lo += cfg.batch_size, ++batch_index) {
      const std::size_t hi = std::min(n, lo + cfg.batch_size);
      const Matrix batch =
          data.select_columns(std::span<const std::size_t>(order).subspan(lo, hi - lo));
      if (!model.actnorm_initialized()) {
        model.initialize_actnorm(batch);
        report.initial_nll = mean_nll(model, data, cfg.threads);
      } else if (epoch == 1 && batch_index == 0) {
        report.initial_nll = mean_nll(model, data, cfg.threads);
      }
      const LossAndGrad lg = loss_and_grad(model, batch, cfg.weight_decay, cfg.threads);
      if (!std::isfinite(lg.loss) || !all_finite(lg.grad)) {
        std::string block = first_bad_block(model, model.params().values());
        if (block.empty()) block = first_bad_block(model, lg.grad);
        throw TrainingDivergedError("training diverged: non-finite loss at epoch " +
                                        std::to_string(epoch) + ", batch " +
                                        std::to_string(batch_index) + " (block " +
                                        (block.empty() ? "?" : block) + ")",
                                    epoch, batch_index, block);
      }
      nll_sum += lg.mean_nll * static_cast<double>(hi - lo);
      wd_sum += lg.weight_decay_term * static_cast<double>(hi - lo);
      adam_step(state, model.params().values(), lg.grad, cfg.adam);
    }
    const double mnll = nll_sum / static_cast<double>(n);
    const double mwd = wd_sum / static_cast<double>(n);
    report.epoch_nll.push_back(mnll);
    report.epoch_weight_decay.push_back(mwd);
    report.epoch_loss.push_back(mnll + mwd);
    if (on_epoch) on_epoch(epoch, mnll, mnll + mwd);
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace isogeo
