// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

// Dense-math substrate for the flow-matching trainer: a row-major matrix, a
// time- and observation-conditioned MLP with exact reverse-mode gradients, and
// Adam. Everything is 64-bit and bit-deterministic for a given build.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace pf2mp::nnet {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool all_finite() const;
  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Activation : std::uint32_t { relu = 0, tanh = 1 };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

// Weights and biases of every affine layer. weights[l] is (out x in).
// `skip` holds the time-gate coefficients of the action skip path (empty when
// the net has none). Also used as the gradient and Adam-moment container.
struct ParameterSet {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  std::vector<double> skip;

  std::size_t count() const;
  ParameterSet zeros_like() const;
  bool same_shape(const ParameterSet& other) const;
  bool all_finite() const;

  // Flattened copy in layer order (W0, b0, W1, b1, ..., skip).
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);

  bool operator==(const ParameterSet&) const = default;
};

using Gradients = ParameterSet;

struct NetConfig {
  std::size_t action_dim = 160;
  std::size_t obs_dim = 4;
  std::vector<std::size_t> hidden = {256, 256, 256};
  Activation activation = Activation::relu;
  std::size_t time_features = 4;
  bool action_skip = true;
};

// Per-layer inputs kept from a batched forward pass for the backward pass.
struct ForwardCache {
  std::vector<Matrix> layer_inputs;  // layer_inputs[l] is the input of layer l
  Matrix output;
};

// v(A, t; o): MLP over [A_flat, o, t, sin(pi f t), cos(pi f t) for f = 1, 2, 4, ...],
// optionally plus a skip path g(t) * A_flat whose scalar gain is
// g = kSkipGainScale * <skip, [1, t, sin(pi f t), cos(pi f t), ...]>.
class VectorFieldNet {
 public:
  // Lets Adam's bounded per-step moves reach gains of order 1 / (1 - t).
  static constexpr double kSkipGainScale = 10.0;

  // Kaiming (relu) or Xavier (tanh) normal init, zero biases.
  VectorFieldNet(const NetConfig& config, std::uint64_t seed);

  // Rebuilds a net from stored parameters; throws DimensionError if they do
  // not compose with layer_dims.
  VectorFieldNet(std::vector<std::size_t> layer_dims, std::size_t obs_dim, Activation activation,
                 std::size_t time_features, ParameterSet params);

  static std::size_t skip_size(std::size_t time_features) { return 2 + 2 * time_features; }

  const std::vector<std::size_t>& layer_dims() const { return layer_dims_; }
  std::size_t input_dim() const { return layer_dims_.front(); }
  std::size_t output_dim() const { return layer_dims_.back(); }
  std::size_t action_dim() const { return layer_dims_.back(); }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t time_features() const { return time_features_; }
  std::size_t num_layers() const { return params_.weights.size(); }
  Activation activation() const { return activation_; }
  bool has_action_skip() const { return !params_.skip.empty(); }

  const ParameterSet& params() const { return params_; }
  ParameterSet& mutable_params() { return params_; }
  std::size_t parameter_count() const { return params_.count(); }

  // Writes the network input row for (A, t, o) into `out` (size input_dim()).
  void embed(std::span<const double> action, double t, std::span<const double> obs,
             std::span<double> out) const;

  // Batched forward on pre-embedded inputs (batch x input_dim).
  ForwardCache forward_batch(const Matrix& inputs) const;

  // Gradient of sum_b <upstream_b, output_b> with respect to the parameters.
  Gradients backward_batch(const ForwardCache& cache, const Matrix& upstream) const;

  bool operator==(const VectorFieldNet&) const = default;

 private:
  void check_shapes() const;
  double skip_gain(std::span<const double> input) const;

  std::vector<std::size_t> layer_dims_;
  std::size_t obs_dim_ = 0;
  Activation activation_ = Activation::relu;
  std::size_t time_features_ = 0;
  ParameterSet params_;
};

std::vector<double> net_forward(const VectorFieldNet& net, std::span<const double> action,
                                double t, std::span<const double> obs);

Gradients net_backward(const VectorFieldNet& net, std::span<const double> action, double t,
                       std::span<const double> obs, std::span<const double> upstream);

struct AdamState {
  std::uint64_t step = 0;
  ParameterSet first_moment;
  ParameterSet second_moment;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(const ParameterSet& params, double learning_rate = 1e-3,
                              double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);
};

// Bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, ParameterSet& params, const Gradients& grads);

}  // namespace pf2mp::nnet
