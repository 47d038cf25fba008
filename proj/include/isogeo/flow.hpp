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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isogeo/diffeomorphism.hpp"
#include "isogeo/flow_layers.hpp"
#include "isogeo/linalg.hpp"

namespace isogeo {

enum class DataKind { Vector, Image };

enum class CouplingNetKind {
  FixedFilter,  ///< fixed 1D filter followed by a learnable activation per entry
  FeedForward,  ///< dense layers with learnable activations per node
  Conv,         ///< masked 2D convolutions with learnable activations per channel
};

/// Architecture of a constant-determinant flow.
///
/// Vector blocks are actnorm -> Householder stack -> additive coupling.
/// Image blocks are actnorm -> masked conv (updates J) -> masked conv
/// (updates the complement) -> additive coupling with a conv net. The
/// coupling mask parity alternates from block to block.
struct FlowConfig {
  DataKind kind = DataKind::Vector;
  std::size_t dim = 2;
  ImageShape image{1, 28, 28};
  int blocks = 2;
  int activation_order = 2;
  CouplingNetKind coupling = CouplingNetKind::FixedFilter;
  std::vector<double> fixed_filter{1.0, 0.0, 1.0};
  /// Hidden widths (feed-forward) or hidden channel counts (conv).
  std::vector<std::size_t> hidden;
  std::size_t kernel_size = 5;
  std::size_t linear_kernel_size = 5;
  int householder_reflections = 2;
  bool actnorm_data_init = true;
  double init_scale = 0.01;

  std::size_t data_dim() const;
  void validate() const;

  static FlowConfig double_gaussian();
  static FlowConfig hemisphere();
  /// Desk-scale image flow: 2 blocks, 16-channel coupling nets.
  static FlowConfig mnist_reduced();
};

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// Flat storage for every learnable parameter with a name -> range layout.
class ParamVector {
 public:
  std::size_t append(std::string name, std::size_t length);

  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<ParamBlock>& layout() const { return layout_; }

  const ParamBlock* find(std::string_view name) const;
  std::span<double> block(std::string_view name);
  std::span<const double> block(std::string_view name) const;

 private:
  Vector values_;
  std::vector<ParamBlock> layout_;
};

/// The network f inside an additive coupling. Parameters are passed as a
/// span into the model's ParamVector.
class CouplingNet {
 public:
  virtual ~CouplingNet() = default;
  virtual std::size_t param_count() const = 0;
  virtual void initialize(std::span<double> params, double scale,
                          std::mt19937_64& rng) const = 0;
  virtual void eval(std::span<const double> params, std::span<const double> u,
                    std::span<double> out) const = 0;
  /// out = D_u f [du].
  virtual void jvp(std::span<const double> params, std::span<const double> u,
                   std::span<const double> du, std::span<double> out) const = 0;
  /// grad_u += (D_u f)^T g, grad_params += (D_params f)^T g.
  virtual void vjp(std::span<const double> params, std::span<const double> u,
                   std::span<const double> g, std::span<double> grad_u,
                   std::span<double> grad_params) const = 0;
};

/// c = filter * u, out_j = sigma_j(c_j) with per-entry activation coefficients.
class FixedFilterNet final : public CouplingNet {
 public:
  FixedFilterNet(std::size_t dim, std::vector<double> taps, int order);
  std::size_t param_count() const override { return dim_ * order_; }
  void initialize(std::span<double> params, double scale,
                  std::mt19937_64& rng) const override;
  void eval(std::span<const double> params, std::span<const double> u,
            std::span<double> out) const override;
  void jvp(std::span<const double> params, std::span<const double> u,
           std::span<const double> du, std::span<double> out) const override;
  void vjp(std::span<const double> params, std::span<const double> u,
           std::span<const double> g, std::span<double> grad_u,
           std::span<double> grad_params) const override;

 private:
  std::size_t dim_;
  std::vector<double> taps_;
  std::size_t order_;
};

/// Dense net dim -> hidden... -> dim; each hidden node has its own
/// activation coefficients, the output layer is linear.
class FeedForwardNet final : public CouplingNet {
 public:
  FeedForwardNet(std::size_t dim, std::vector<std::size_t> hidden, int order);
  std::size_t param_count() const override { return count_; }
  void initialize(std::span<double> params, double scale,
                  std::mt19937_64& rng) const override;
  void eval(std::span<const double> params, std::span<const double> u,
            std::span<double> out) const override;
  void jvp(std::span<const double> params, std::span<const double> u,
           std::span<const double> du, std::span<double> out) const override;
  void vjp(std::span<const double> params, std::span<const double> u,
           std::span<const double> g, std::span<double> grad_u,
           std::span<double> grad_params) const override;

 private:
  struct Layer {
    std::size_t in, out;
    std::size_t w_off, b_off, a_off;  // a_off unused for the output layer
    bool activated;
  };
  std::vector<Layer> layers_;
  std::size_t order_;
  std::size_t count_ = 0;
};

/// Chain of zero-padded 2D convolutions over channels[0] -> ... ->
/// channels.back(); a per-channel activation follows every conv except the
/// last. A two-entry channel list is a single conv with bias.
class ConvNet final : public CouplingNet {
 public:
  ConvNet(std::size_t height, std::size_t width, std::vector<std::size_t> channels,
          std::size_t kernel, int order);
  std::size_t param_count() const override { return count_; }
  void initialize(std::span<double> params, double scale,
                  std::mt19937_64& rng) const override;
  void eval(std::span<const double> params, std::span<const double> u,
            std::span<double> out) const override;
  void jvp(std::span<const double> params, std::span<const double> u,
           std::span<const double> du, std::span<double> out) const override;
  void vjp(std::span<const double> params, std::span<const double> u,
           std::span<const double> g, std::span<double> grad_u,
           std::span<double> grad_params) const override;

 private:
  struct Layer {
    ConvShape shape;
    std::size_t k_off, b_off, a_off;
    bool activated;
  };
  // Pre-activations of every layer (for backprop and tangents).
  void run(std::span<const double> params, std::span<const double> u,
           std::vector<Vector>& pre, std::vector<Vector>& post) const;
  std::size_t height_, width_;
  std::vector<Layer> layers_;
  std::size_t order_;
  std::size_t count_ = 0;
};

/// x_j += f(m_J . x)_j for j outside J; entries in J are unchanged.
void coupling_forward(const CouplingNet& net, std::span<const double> params,
                      const CouplingMask& keep, std::span<double> x);
void coupling_inverse(const CouplingNet& net, std::span<const double> params,
                      const CouplingMask& keep, std::span<double> y);

/// Kernel and bias of one masked invertible convolution (c x c x k x k, c).
struct ConvCouplingParams {
  ImageShape shape;
  std::size_t kernel_size = 1;
  std::span<const double> kernel;
  std::span<const double> bias;
};

/// x + m_update . (K * ((1 - m_update) . x) + b). Volume preserving and
/// exactly invertible. Throws ShapeError when x does not match p.shape.
void masked_conv_coupling_forward(const ConvCouplingParams& p, const CouplingMask& update,
                                  std::span<double> x);
void masked_conv_coupling_inverse(const ConvCouplingParams& p, const CouplingMask& update,
                                  std::span<double> y);

namespace detail {
class FlowLayer;
}

/// Gradient of <grad_out, phi(x)> + grad_logdet * log|det D phi| with
/// respect to the parameters and the input.
struct FlowGradient {
  Vector params;
  Vector input;
};

/// Forward pass that keeps the input of every layer for a later reverse pass.
struct FlowTape {
  std::vector<Vector> layer_inputs;
  Vector output;
  double log_abs_det = 0.0;
};

/// A learnable constant-determinant diffeomorphism.
class FlowModel final : public Diffeomorphism {
 public:
  /// Builds the layer layout with all parameters zero; see build_flow().
  explicit FlowModel(FlowConfig config);

  std::size_t dim() const override { return config_.data_dim(); }
  std::optional<ImageShape> image_shape() const override;

  const FlowConfig& config() const { return config_; }
  const ParamVector& params() const { return params_; }
  ParamVector& params() { return params_; }

  bool actnorm_initialized() const { return actnorm_initialized_; }
  void set_actnorm_initialized(bool v) { actnorm_initialized_ = v; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t s) { seed_ = s; }

  /// Data-dependent actnorm initialization: each actnorm layer is set so its
  /// outputs on `batch` (one sample per column) have zero mean and unit
  /// variance per dimension/channel. Marks the model initialized.
  void initialize_actnorm(const Matrix& batch);

  /// Random parameter initialization from `seed`; see build_flow().
  void initialize_parameters(std::uint64_t seed);

  FlowTape record(std::span<const double> x) const;
  FlowGradient backward(const FlowTape& tape, std::span<const double> grad_out,
                        double grad_logdet) const;

  std::size_t layer_count() const { return layers_.size(); }

 protected:
  Vector do_forward(std::span<const double> x) const override;
  Vector do_inverse(std::span<const double> y) const override;
  Vector do_jvp(std::span<const double> x, std::span<const double> v) const override;
  Vector do_inverse_jvp(std::span<const double> y,
                        std::span<const double> w) const override;
  double do_log_abs_det(std::span<const double> x) const override;

 private:
  void require_initialized() const;

  FlowConfig config_;
  ParamVector params_;
  std::vector<std::shared_ptr<const detail::FlowLayer>> layers_;
  bool actnorm_initialized_ = true;
  std::uint64_t seed_ = 0;
};

/// Deterministic initialization: coupling weights ~ N(0, init_scale^2),
/// activations start as tanh (a_1 = 1), Householder vectors random unit,
/// actnorm s = 1, b = 0. With actnorm_data_init the model must see
/// initialize_actnorm() before it can be evaluated.
FlowModel build_flow(const FlowConfig& config, std::uint64_t seed);

FlowGradient flow_vjp(const FlowModel& model, std::span<const double> x,
                      std::span<const double> grad_out, double grad_logdet);

}  // namespace isogeo
