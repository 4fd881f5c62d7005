// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include "pf2mp/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pf2mp/errors.hpp"
#include "pf2mp/rng.hpp"

namespace pf2mp::nnet {
namespace {

constexpr double kMomentFloor = 1e-280;

bool finite_span(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = y.size();
  const double* xp = x.data();
  double* yp = y.data();
  for (std::size_t i = 0; i < n; ++i) yp[i] += a * xp[i];
}

constexpr std::size_t kTransposeMinBatch = 4;

// out = b + W in for one row, four outputs at a time.
void affine_rows(const Matrix& w, std::span<const double> b, std::span<const double> in,
                 std::span<double> out) {
  const std::size_t n_out = w.rows();
  const std::size_t n_in = w.cols();
  std::size_t o = 0;
  for (; o + 4 <= n_out; o += 4) {
    const double* w0 = w.row(o).data();
    const double* w1 = w.row(o + 1).data();
    const double* w2 = w.row(o + 2).data();
    const double* w3 = w.row(o + 3).data();
    double s0 = b[o], s1 = b[o + 1], s2 = b[o + 2], s3 = b[o + 3];
    for (std::size_t k = 0; k < n_in; ++k) {
      const double xk = in[k];
      if (xk == 0.0) continue;
      s0 += xk * w0[k];
      s1 += xk * w1[k];
      s2 += xk * w2[k];
      s3 += xk * w3[k];
    }
    out[o] = s0;
    out[o + 1] = s1;
    out[o + 2] = s2;
    out[o + 3] = s3;
  }
  for (; o < n_out; ++o) {
    const double* wo = w.row(o).data();
    double s = b[o];
    for (std::size_t k = 0; k < n_in; ++k) {
      if (in[k] == 0.0) continue;
      s += in[k] * wo[k];
    }
    out[o] = s;
  }
}

std::string dims_message(std::string_view what, std::size_t expected, std::size_t got) {
  return std::string(what) + ": expected " + std::to_string(expected) + ", got " +
         std::to_string(got);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Matrix::from_rows: ragged rows");
    std::copy(row.begin(), row.end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * c));
    ++i;
  }
  return m;
}

bool Matrix::all_finite() const { return finite_span(data_); }

std::string_view to_string(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::size_t ParameterSet::count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n + skip.size();
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet z;
  for (const auto& w : weights) z.weights.emplace_back(w.rows(), w.cols());
  for (const auto& b : biases) z.biases.emplace_back(b.size(), 0.0);
  z.skip.assign(skip.size(), 0.0);
  return z;
}

bool ParameterSet::same_shape(const ParameterSet& other) const {
  if (weights.size() != other.weights.size() || biases.size() != other.biases.size()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() ||
        weights[l].cols() != other.weights[l].cols())
      return false;
  }
  for (std::size_t l = 0; l < biases.size(); ++l) {
    if (biases[l].size() != other.biases[l].size()) return false;
  }
  return skip.size() == other.skip.size();
}

bool ParameterSet::all_finite() const {
  for (const auto& w : weights)
    if (!w.all_finite()) return false;
  for (const auto& b : biases)
    if (!finite_span(b)) return false;
  return finite_span(skip);
}

std::vector<double> ParameterSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(count());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.insert(flat.end(), weights[l].data().begin(), weights[l].data().end());
    flat.insert(flat.end(), biases[l].begin(), biases[l].end());
  }
  flat.insert(flat.end(), skip.begin(), skip.end());
  return flat;
}

void ParameterSet::assign_flat(std::span<const double> flat) {
  if (flat.size() != count()) throw DimensionError(dims_message("assign_flat", count(), flat.size()));
  std::size_t pos = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto w = weights[l].data();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), w.size(), w.begin());
    pos += w.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), biases[l].size(),
                biases[l].begin());
    pos += biases[l].size();
  }
  std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), skip.size(), skip.begin());
}

VectorFieldNet::VectorFieldNet(const NetConfig& config, std::uint64_t seed)
    : obs_dim_(config.obs_dim), activation_(config.activation), time_features_(config.time_features) {
  if (config.action_dim == 0) throw DimensionError("VectorFieldNet: action_dim must be > 0");
  layer_dims_.push_back(config.action_dim + config.obs_dim + 1 + 2 * config.time_features);
  for (std::size_t h : config.hidden) {
    if (h == 0) throw DimensionError("VectorFieldNet: hidden width must be > 0");
    layer_dims_.push_back(h);
  }
  layer_dims_.push_back(config.action_dim);

  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_dims_.size(); ++l) {
    const std::size_t fan_in = layer_dims_[l];
    const std::size_t fan_out = layer_dims_[l + 1];
    const double stddev = activation_ == Activation::relu
                              ? std::sqrt(2.0 / static_cast<double>(fan_in))
                              : std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (double& x : w.data()) x = stddev * rng.normal();
    params_.weights.push_back(std::move(w));
    params_.biases.emplace_back(fan_out, 0.0);
  }
  if (config.action_skip) {
    params_.skip.assign(skip_size(time_features_), 0.0);
    params_.skip[0] = -1.0 / kSkipGainScale;
  }
}

VectorFieldNet::VectorFieldNet(std::vector<std::size_t> layer_dims, std::size_t obs_dim,
                               Activation activation, std::size_t time_features,
                               ParameterSet params)
    : layer_dims_(std::move(layer_dims)),
      obs_dim_(obs_dim),
      activation_(activation),
      time_features_(time_features),
      params_(std::move(params)) {
  check_shapes();
}

void VectorFieldNet::check_shapes() const {
  if (layer_dims_.size() < 2) throw DimensionError("VectorFieldNet: need at least one layer");
  const std::size_t expected_in = layer_dims_.back() + obs_dim_ + 1 + 2 * time_features_;
  if (layer_dims_.front() != expected_in)
    throw DimensionError(dims_message("VectorFieldNet input width", expected_in, layer_dims_.front()));
  const std::size_t layers = layer_dims_.size() - 1;
  if (params_.weights.size() != layers || params_.biases.size() != layers)
    throw DimensionError(dims_message("VectorFieldNet layer count", layers, params_.weights.size()));
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& w = params_.weights[l];
    if (w.rows() != layer_dims_[l + 1] || w.cols() != layer_dims_[l] ||
        params_.biases[l].size() != layer_dims_[l + 1])
      throw DimensionError("VectorFieldNet: layer " + std::to_string(l) +
                           " shape does not compose with layer_dims");
  }
  if (!params_.skip.empty() && params_.skip.size() != skip_size(time_features_))
    throw DimensionError(dims_message("VectorFieldNet skip gate", skip_size(time_features_),
                                      params_.skip.size()));
}

double VectorFieldNet::skip_gain(std::span<const double> input) const {
  const auto& s = params_.skip;
  const std::size_t base = action_dim() + obs_dim_;
  double g = s[0];
  for (std::size_t k = 1; k < s.size(); ++k) g += s[k] * input[base + k - 1];
  return kSkipGainScale * g;
}

void VectorFieldNet::embed(std::span<const double> action, double t, std::span<const double> obs,
                           std::span<double> out) const {
  if (action.size() != action_dim())
    throw DimensionError(dims_message("net action input", action_dim(), action.size()));
  if (obs.size() != obs_dim_) throw DimensionError(dims_message("net observation input", obs_dim_, obs.size()));
  if (out.size() != input_dim()) throw DimensionError(dims_message("net embedding", input_dim(), out.size()));
  if (!(t >= 0.0 && t <= 1.0)) throw DimensionError("net time input must lie in [0, 1]");

  auto it = std::copy(action.begin(), action.end(), out.begin());
  it = std::copy(obs.begin(), obs.end(), it);
  *it++ = t;
  double freq = 1.0;
  for (std::size_t k = 0; k < time_features_; ++k, freq *= 2.0) {
    const double angle = std::numbers::pi * freq * t;
    *it++ = std::sin(angle);
    *it++ = std::cos(angle);
  }
}

ForwardCache VectorFieldNet::forward_batch(const Matrix& inputs) const {
  if (inputs.cols() != input_dim())
    throw DimensionError(dims_message("forward_batch input width", input_dim(), inputs.cols()));
  const std::size_t batch = inputs.rows();
  const std::size_t layers = num_layers();

  ForwardCache cache;
  cache.layer_inputs.reserve(layers);
  cache.layer_inputs.push_back(inputs);

  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& x = cache.layer_inputs.back();
    const Matrix& w = params_.weights[l];
    const auto& b = params_.biases[l];
    const std::size_t n_in = w.cols();
    const std::size_t n_out = w.rows();

    // out[r][o] = b[o] + sum_k x[r][k] w[o][k], accumulated in ascending k.
    // Both paths below perform the same operations in the same order.
    Matrix y(batch, n_out);
    if (batch < kTransposeMinBatch) {
      for (std::size_t r = 0; r < batch; ++r) affine_rows(w, b, x.row(r), y.row(r));
    } else {
      Matrix wt(n_in, n_out);
      for (std::size_t o = 0; o < n_out; ++o)
        for (std::size_t k = 0; k < n_in; ++k) wt(k, o) = w(o, k);
      for (std::size_t r = 0; r < batch; ++r) {
        auto out = y.row(r);
        std::copy(b.begin(), b.end(), out.begin());
        const auto in = x.row(r);
        for (std::size_t k = 0; k < n_in; ++k) {
          const double xk = in[k];
          if (xk == 0.0) continue;
          axpy(xk, wt.row(k), out);
        }
      }
    }

    const bool last = l + 1 == layers;
    if (last && has_action_skip()) {
      for (std::size_t r = 0; r < batch; ++r) {
        const auto in = inputs.row(r);
        const double g = skip_gain(in);
        auto out = y.row(r);
        for (std::size_t j = 0; j < n_out; ++j) out[j] += g * in[j];
      }
    }
    if (!last) {
      if (activation_ == Activation::relu) {
        for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
      } else {
        for (double& v : y.data()) v = std::tanh(v);
      }
    }
    if (!y.all_finite())
      throw NumericError("VectorFieldNet: non-finite activation in layer " + std::to_string(l));
    if (last) {
      cache.output = std::move(y);
    } else {
      cache.layer_inputs.push_back(std::move(y));
    }
  }
  return cache;
}

Gradients VectorFieldNet::backward_batch(const ForwardCache& cache, const Matrix& upstream) const {
  const std::size_t layers = num_layers();
  if (cache.layer_inputs.size() != layers)
    throw DimensionError("backward_batch: cache does not belong to this network");
  const std::size_t batch = cache.output.rows();
  if (upstream.rows() != batch || upstream.cols() != output_dim())
    throw DimensionError(dims_message("backward_batch upstream width", output_dim(), upstream.cols()));

  Gradients grads = params_.zeros_like();
  if (has_action_skip()) {
    const std::size_t base = action_dim() + obs_dim_;
    for (std::size_t r = 0; r < batch; ++r) {
      const auto in = cache.layer_inputs[0].row(r);
      const auto u = upstream.row(r);
      double c = 0.0;
      for (std::size_t j = 0; j < u.size(); ++j) c += u[j] * in[j];
      c *= kSkipGainScale;
      grads.skip[0] += c;
      for (std::size_t k = 1; k < grads.skip.size(); ++k) grads.skip[k] += c * in[base + k - 1];
    }
  }
  Matrix delta = upstream;
  for (std::size_t li = layers; li-- > 0;) {
    const Matrix& x = cache.layer_inputs[li];
    const Matrix& w = params_.weights[li];
    const std::size_t n_in = w.cols();
    const std::size_t n_out = w.rows();
    Matrix& gw = grads.weights[li];
    auto& gb = grads.biases[li];
    const bool need_input_grad = li > 0;
    Matrix dx(need_input_grad ? batch : 0, n_in);

    for (std::size_t r = 0; r < batch; ++r) {
      const auto d = delta.row(r);
      const auto in = x.row(r);
      for (std::size_t o = 0; o < n_out; ++o) {
        const double g = d[o];
        if (g == 0.0) continue;
        gb[o] += g;
        axpy(g, in, gw.row(o));
        if (need_input_grad) axpy(g, w.row(o), dx.row(r));
      }
    }

    if (need_input_grad) {
      // x is the post-activation output of layer li - 1.
      auto dxd = dx.data();
      const auto xd = x.data();
      if (activation_ == Activation::relu) {
        for (std::size_t i = 0; i < dxd.size(); ++i)
          if (!(xd[i] > 0.0)) dxd[i] = 0.0;
      } else {
        for (std::size_t i = 0; i < dxd.size(); ++i) dxd[i] *= 1.0 - xd[i] * xd[i];
      }
      delta = std::move(dx);
    }
  }
  return grads;
}

std::vector<double> net_forward(const VectorFieldNet& net, std::span<const double> action, double t,
                                std::span<const double> obs) {
  Matrix input(1, net.input_dim());
  net.embed(action, t, obs, input.row(0));
  ForwardCache cache = net.forward_batch(input);
  const auto out = cache.output.row(0);
  return {out.begin(), out.end()};
}

Gradients net_backward(const VectorFieldNet& net, std::span<const double> action, double t,
                       std::span<const double> obs, std::span<const double> upstream) {
  if (upstream.size() != net.output_dim())
    throw DimensionError(dims_message("net_backward upstream", net.output_dim(), upstream.size()));
  Matrix input(1, net.input_dim());
  net.embed(action, t, obs, input.row(0));
  ForwardCache cache = net.forward_batch(input);
  Matrix up(1, net.output_dim());
  std::copy(upstream.begin(), upstream.end(), up.row(0).begin());
  return net.backward_batch(cache, up);
}

AdamState AdamState::for_params(const ParameterSet& params, double learning_rate, double beta1,
                                double beta2, double epsilon) {
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
    throw ConfigError("Adam betas must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
  if (!(learning_rate > 0.0)) throw ConfigError("Adam learning rate must be > 0");
  AdamState s;
  s.first_moment = params.zeros_like();
  s.second_moment = params.zeros_like();
  s.learning_rate = learning_rate;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  return s;
}

void adam_step(AdamState& state, ParameterSet& params, const Gradients& grads) {
  if (!params.same_shape(grads) || !params.same_shape(state.first_moment) ||
      !params.same_shape(state.second_moment))
    throw DimensionError("adam_step: parameter, gradient and moment shapes differ");

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double lr = state.learning_rate;
  const double eps = state.epsilon;

  auto update = [&](std::span<double> p, std::span<const double> g, std::span<double> m,
                    std::span<double> v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      // Moments of parameters with persistently zero gradient decay
      // geometrically; clamp them before they reach subnormal range.
      if (std::abs(m[i]) < kMomentFloor) m[i] = 0.0;
      if (v[i] < kMomentFloor) v[i] = 0.0;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(params.weights[l].data(), grads.weights[l].data(), state.first_moment.weights[l].data(),
           state.second_moment.weights[l].data());
    update(params.biases[l], grads.biases[l], state.first_moment.biases[l],
           state.second_moment.biases[l]);
  }
  update(params.skip, grads.skip, state.first_moment.skip, state.second_moment.skip);
}

}  // namespace pf2mp::nnet
