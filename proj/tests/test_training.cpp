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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "isogeo/checkpoint.hpp"
#include "isogeo/datasets.hpp"
#include "isogeo/errors.hpp"
#include "isogeo/training.hpp"
#include "oracles.hpp"

using namespace isogeo;

namespace {

FlowModel scrambled(FlowConfig cfg, std::uint64_t seed) {
  cfg.actnorm_data_init = false;
  FlowModel m = build_flow(cfg, seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.3);
  for (double& v : m.params().values()) v += n(rng);
  return m;
}

Matrix random_batch(std::size_t d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix b(d, n);
  for (double& v : b.data()) v = oracle::random_vector(1, rng)[0];
  return b;
}

FlowConfig small_image_config() {
  FlowConfig c = FlowConfig::mnist_reduced();
  c.image = {1, 5, 4};
  c.hidden = {3};
  c.kernel_size = 3;
  c.linear_kernel_size = 3;
  c.activation_order = 3;
  return c;
}

FlowConfig feed_forward_config() {
  FlowConfig c = FlowConfig::hemisphere();
  c.coupling = CouplingNetKind::FeedForward;
  c.hidden = {6};
  return c;
}

double param_norm(const FlowModel& m) { return norm(m.params().values()); }

}  // namespace

TEST(Nll, Examples) {
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const IdentityDiffeo id(2);
  EXPECT_NEAR(nll(id, Vector{0, 0}), 1.837877, 5e-7);
  EXPECT_DOUBLE_EQ(nll(id, Vector{0, 0}), log2pi);
  EXPECT_NEAR(nll(id, Vector{1, 0}), 2.337877, 5e-7);
  Matrix two(2, 2);
  two(0, 0) = two(1, 1) = 2.0;
  EXPECT_NEAR(nll(AffineLinearDiffeo(two), Vector{0, 0}), 0.451583, 5e-7);
  EXPECT_NEAR(nll(AffineLinearDiffeo(two), Vector{0, 0}), log2pi - 2 * std::numbers::ln2, 1e-15);
}

TEST(LossAndGrad, MatchesFiniteDifferences) {
  std::uint64_t seed = 1;
  for (const FlowConfig& cfg : {FlowConfig::double_gaussian(), FlowConfig::hemisphere(),
                                feed_forward_config(), small_image_config()}) {
    FlowModel m = scrambled(cfg, seed);
    const Matrix batch = random_batch(m.dim(), 5, seed + 100);
    const double lambda = 0.3;
    const LossAndGrad lg = loss_and_grad(m, batch, lambda);
    auto theta = m.params().values();
    std::mt19937_64 rng(seed++);
    const double h = 1e-5;
    for (const auto& b : m.params().layout()) {
      std::uniform_int_distribution<std::size_t> pick(0, b.length - 1);
      for (int k = 0; k < 20; ++k) {
        const std::size_t i = b.offset + pick(rng);
        const double keep = theta[i];
        theta[i] = keep + h;
        const double fp = loss_and_grad(m, batch, lambda).loss;
        theta[i] = keep - h;
        const double fm = loss_and_grad(m, batch, lambda).loss;
        theta[i] = keep;
        const double fd = (fp - fm) / (2 * h);
        EXPECT_LT(oracle::rel_err(lg.grad[i], fd, 1e-6), 1e-4)
            << b.name << " index " << i - b.offset << " analytic " << lg.grad[i] << " fd " << fd;
      }
    }
  }
}

TEST(LossAndGrad, SingleSampleMatchesFlowVjp) {
  const FlowModel m = scrambled(FlowConfig::double_gaussian(), 2);
  const Vector x{0.4, -1.3};
  Matrix batch(2, 1);
  batch.set_column(0, x);
  const LossAndGrad lg = loss_and_grad(m, batch, 0.0);
  const FlowGradient g = flow_vjp(m, x, m.forward(x), -1.0);
  EXPECT_LT(oracle::max_abs_diff(lg.grad, g.params), 1e-14);
  EXPECT_NEAR(lg.loss, nll(m, x), 1e-14);
  EXPECT_EQ(lg.weight_decay_term, 0.0);
}

TEST(LossAndGrad, WeightDecayIsLambdaTheta) {
  const FlowModel m = scrambled(FlowConfig::hemisphere(), 3);
  const Matrix batch = random_batch(3, 7, 3);
  const LossAndGrad a = loss_and_grad(m, batch, 0.0), b = loss_and_grad(m, batch, 0.5);
  const auto theta = m.params().values();
  for (std::size_t i = 0; i < theta.size(); ++i)
    EXPECT_NEAR(b.grad[i] - a.grad[i], 0.5 * theta[i], 1e-12);
  EXPECT_NEAR(b.weight_decay_term, 0.25 * dot(theta, theta), 1e-12);
  EXPECT_EQ(a.mean_nll, b.mean_nll);
}

TEST(LossAndGrad, ThreadCountDoesNotChangeBits) {
  const FlowModel m = scrambled(FlowConfig::hemisphere(), 4);
  const Matrix batch = random_batch(3, 17, 4);
  const LossAndGrad a = loss_and_grad(m, batch, 0.1, 1), b = loss_and_grad(m, batch, 0.1, 3);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.grad, b.grad);
}

TEST(LossAndGrad, EmptyBatchRejected) {
  const FlowModel m = scrambled(FlowConfig::double_gaussian(), 5);
  EXPECT_THROW(loss_and_grad(m, Matrix(2, 0), 0.0), Error);
}

TEST(Adam, ZeroGradientKeepsParameters) {
  Vector p{1.0, -2.0, 3.0};
  OptimizerState s(3);
  adam_step(s, p, Vector(3, 0.0), AdamConfig{});
  EXPECT_EQ(p, (Vector{1.0, -2.0, 3.0}));
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  const AdamConfig cfg{0.01, 0.9, 0.99, 1e-8};
  const Vector g{0.5, -3.0, 1e-3};
  Vector p{0.0, 0.0, 0.0};
  OptimizerState s(3);
  adam_step(s, p, g, cfg);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(p[i], -cfg.learning_rate * g[i] / (std::abs(g[i]) + cfg.eps), 1e-15);
  EXPECT_EQ(s.step, 1u);
}

TEST(Adam, SecondStepMatchesRecurrence) {
  const AdamConfig cfg{0.1, 0.9, 0.99, 1e-8};
  Vector p{1.0};
  OptimizerState s(1);
  adam_step(s, p, Vector{2.0}, cfg);
  adam_step(s, p, Vector{-1.0}, cfg);
  const double m = 0.9 * 0.1 * 2.0 + 0.1 * -1.0, v = 0.99 * 0.01 * 4.0 + 0.01 * 1.0;
  const double mhat = m / (1 - 0.81), vhat = v / (1 - 0.9801);
  const double first = 0.1 * 2.0 / (2.0 + 1e-8);
  EXPECT_NEAR(p[0], 1.0 - first - 0.1 * mhat / (std::sqrt(vhat) + 1e-8), 1e-14);
}

TEST(TrainConfig, Validation) {
  TrainConfig c = TrainConfig::double_gaussian();
  EXPECT_NO_THROW(c.validate());
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig::double_gaussian();
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig::double_gaussian();
  c.weight_decay = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig::double_gaussian();
  c.adam.beta2 = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);

  TrainConfig zero = TrainConfig::double_gaussian();
  zero.epochs = 0;
  FlowModel m = build_flow(zero.flow, 0);
  EXPECT_THROW(train(m, sample_bimodal_gaussian(20, 0), zero), ConfigError);
}

TEST(TrainConfig, ExperimentPresets) {
  const TrainConfig dg = TrainConfig::double_gaussian(), hs = TrainConfig::hemisphere();
  EXPECT_EQ(dg.flow.blocks, 2);
  EXPECT_EQ(dg.epochs, 500);
  EXPECT_EQ(dg.batch_size, 16u);
  EXPECT_EQ(dg.weight_decay, 0.2);
  EXPECT_EQ(hs.flow.blocks, 3);
  EXPECT_EQ(hs.weight_decay, 0.02);
  EXPECT_EQ(dg.adam.beta1, 0.9);
  EXPECT_EQ(dg.adam.beta2, 0.99);
  EXPECT_EQ(dg.adam.learning_rate, 1e-3);
}

TEST(TrainConfig, JsonRoundTripAndShippedConfigs) {
  TrainConfig c = TrainConfig::hemisphere();
  c.seed = 99;
  c.adam.eps = 1e-7;
  EXPECT_EQ(train_config_to_json(train_config_from_json(train_config_to_json(c))),
            train_config_to_json(c));
  const std::filesystem::path dir = std::filesystem::path(ISOGEO_SOURCE_DIR) / "configs";
  for (const char* name :
       {"double_gaussian.json", "hemisphere.json", "mnist_reduced.json", "mnist_full.json"})
    EXPECT_NO_THROW(train_config_from_json(read_json_file(dir / name))) << name;
  const TrainConfig dg = train_config_from_json(read_json_file(dir / "double_gaussian.json"));
  EXPECT_EQ(dg.weight_decay, 0.2);
  EXPECT_EQ(dg.flow.blocks, 2);
  EXPECT_EQ(dg.epochs, 500);
}

TEST(TrainConfig, PresetMergeAndUnknownKeys) {
  const TrainConfig c = train_config_from_json(
      nlohmann::json{{"preset", "hemisphere"}, {"epochs", 3}, {"flow", {{"blocks", 4}}}});
  EXPECT_EQ(c.epochs, 3);
  EXPECT_EQ(c.flow.blocks, 4);
  EXPECT_EQ(c.flow.dim, 3u);
  EXPECT_EQ(c.weight_decay, 0.02);
  EXPECT_THROW(train_config_from_json(nlohmann::json{{"epoch", 3}}), ConfigError);
  EXPECT_THROW(train_config_from_json(nlohmann::json{{"preset", "cifar"}}), ConfigError);
  EXPECT_THROW(train_config_from_json(nlohmann::json{{"adam", {{"lr", 1.0}}}}), ConfigError);
  EXPECT_THROW(train_config_from_json(nlohmann::json{{"epochs", "many"}}), ConfigError);
}

namespace {

TrainConfig quick_config(int epochs, std::size_t threads = 1) {
  TrainConfig c = TrainConfig::double_gaussian();
  c.epochs = epochs;
  c.seed = 7;
  c.threads = threads;
  return c;
}

}  // namespace

TEST(Train, LossDecreasesAndDeterminantStaysConstant) {
  const Matrix data = sample_bimodal_gaussian(200, 1);
  const TrainConfig cfg = quick_config(30);
  FlowModel m = build_flow(cfg.flow, cfg.seed);
  const TrainReport r = train(m, data, cfg);
  ASSERT_EQ(r.epoch_nll.size(), 30u);
  ASSERT_EQ(r.epoch_loss.size(), 30u);
  ASSERT_EQ(r.epoch_weight_decay.size(), 30u);
  EXPECT_LT(r.epoch_nll.back(), r.epoch_nll.front());
  EXPECT_LT(mean_nll(m, data), r.initial_nll);
  EXPECT_TRUE(m.actnorm_initialized());
  const double ld = m.log_abs_det(data.col(0));
  for (std::size_t j = 1; j < data.cols(); ++j) EXPECT_NEAR(m.log_abs_det(data.col(j)), ld, 1e-10);
  const auto j = r.to_json();
  EXPECT_EQ(j["epoch_nll"].size(), 30u);
  EXPECT_TRUE(j.contains("adam"));
}

TEST(Train, DeterministicAcrossRunsAndThreads) {
  const Matrix data = sample_bimodal_gaussian(100, 2);
  FlowModel a = build_flow(quick_config(3).flow, 7), b = build_flow(quick_config(3).flow, 7),
            c = build_flow(quick_config(3).flow, 7);
  const TrainReport ra = train(a, data, quick_config(3));
  const TrainReport rb = train(b, data, quick_config(3));
  const TrainReport rc = train(c, data, quick_config(3, 2));
  EXPECT_EQ(ra.epoch_loss, rb.epoch_loss);
  EXPECT_EQ(ra.epoch_loss, rc.epoch_loss);
  EXPECT_TRUE(std::equal(a.params().values().begin(), a.params().values().end(),
                         c.params().values().begin()));
}

TEST(Train, StrongWeightDecayShrinksParameters) {
  const Matrix data = sample_bimodal_gaussian(160, 3);
  TrainConfig cfg = quick_config(15);
  cfg.weight_decay = 1e3;
  FlowModel m = build_flow(cfg.flow, cfg.seed);
  std::vector<double> norms;
  train(m, data, cfg, [&](int, double, double) { norms.push_back(param_norm(m)); });
  ASSERT_EQ(norms.size(), 15u);
  for (std::size_t e = 2; e < norms.size(); ++e) EXPECT_LT(norms[e], norms[e - 1]) << e;
  EXPECT_LT(norms.back(), 0.9 * norms[1]);
}

TEST(Train, EpochCallbackSeesEveryEpoch) {
  const Matrix data = sample_bimodal_gaussian(40, 4);
  FlowModel m = build_flow(quick_config(4).flow, 7);
  std::vector<int> seen;
  const TrainReport r =
      train(m, data, quick_config(4), [&](int e, double nll_value, double loss) {
        seen.push_back(e);
        EXPECT_LE(nll_value, loss);
      });
  EXPECT_EQ(seen, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(r.epoch_nll.size(), 4u);
}
