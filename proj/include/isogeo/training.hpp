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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "isogeo/errors.hpp"
#include "isogeo/flow.hpp"

namespace isogeo {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

struct TrainConfig {
  int epochs = 500;
  std::size_t batch_size = 16;
  double weight_decay = 0.0;  ///< lambda in mean NLL + lambda/2 |theta|^2
  AdamConfig adam;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string dataset;  ///< informational: where the data came from
  FlowConfig flow;

  void validate() const;

  static TrainConfig double_gaussian();
  static TrainConfig hemisphere();
  static TrainConfig mnist_reduced();
};

nlohmann::json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct OptimizerState {
  Vector m;
  Vector v;
  std::uint64_t step = 0;

  OptimizerState() = default;
  explicit OptimizerState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// -log p(x) = (d/2) log 2 pi + |phi(x)|^2 / 2 - log |det D_x phi|.
double nll(const Diffeomorphism& phi, std::span<const double> x);

struct LossAndGrad {
  double loss = 0.0;
  double mean_nll = 0.0;
  double weight_decay_term = 0.0;
  Vector grad;
};

/// Mean NLL over the batch columns plus lambda/2 |theta|^2 and its gradient.
/// Per-sample gradients are summed in column order whatever the thread count.
LossAndGrad loss_and_grad(const FlowModel& model, const Matrix& batch, double lambda,
                          std::size_t threads = 1);

void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> grad,
               const AdamConfig& cfg);

struct TrainReport {
  double initial_nll = 0.0;  ///< mean NLL on all data right after actnorm init
  std::vector<double> epoch_nll;
  std::vector<double> epoch_weight_decay;
  std::vector<double> epoch_loss;
  double seconds = 0.0;
  std::string checkpoint_path;
  AdamConfig adam;

  nlohmann::json to_json() const;
};

/// Non-finite loss or parameters during training.
class TrainingDivergedError : public NumericalError {
 public:
  TrainingDivergedError(const std::string& what, int epoch, std::size_t batch,
                        std::string block)
      : NumericalError(what), epoch_(epoch), batch_(batch), block_(std::move(block)) {}
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }
  const std::string& block() const { return block_; }

 private:
  int epoch_;
  std::size_t batch_;
  std::string block_;
};

using EpochCallback = std::function<void(int epoch, double nll, double loss)>;

/// Adam over shuffled mini-batches (the last partial batch is kept). An
/// uninitialized actnorm is set from the first batch.
TrainReport train(FlowModel& model, const Matrix& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Mean NLL over all columns.
double mean_nll(const Diffeomorphism& phi, const Matrix& data, std::size_t threads = 1);

}  // namespace isogeo
