// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include "pf2mp/flowmatch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "pf2mp/errors.hpp"

namespace pf2mp {
namespace {

void require_same_shape(const ActionSeries& a, const ActionSeries& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": action series shapes differ (" +
                         std::to_string(a.horizon()) + "x" + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.horizon()) + "x" + std::to_string(b.dim()) + ")");
  }
}

// Residual v - u for every row of a batch, returned as the (batch x action)
// matrix together with the network cache.
struct BatchEval {
  nnet::ForwardCache cache;
  nnet::Matrix residual;
  double loss = 0.0;
};

BatchEval evaluate_batch(const nnet::VectorFieldNet& net, const nnet::Matrix& inputs,
                         const nnet::Matrix& targets) {
  BatchEval eval;
  eval.cache = net.forward_batch(inputs);
  eval.residual = eval.cache.output;
  auto r = eval.residual.data();
  const auto u = targets.data();
  double total = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] -= u[i];
    total += r[i] * r[i];
  }
  eval.loss = total / static_cast<double>(inputs.rows());
  return eval;
}

nnet::Gradients loss_gradients(const nnet::VectorFieldNet& net, BatchEval& eval) {
  // d/dv of mean_b ||v_b - u_b||^2 is 2 (v_b - u_b) / B.
  const double scale = 2.0 / static_cast<double>(eval.residual.rows());
  for (double& x : eval.residual.data()) x *= scale;
  return net.backward_batch(eval.cache, eval.residual);
}

}  // namespace

double norm(Point2 p) { return std::hypot(p.x, p.y); }
double distance(Point2 a, Point2 b) { return norm(a - b); }

ActionSeries::ActionSeries(std::size_t horizon, std::size_t dim, double fill)
    : horizon_(horizon), dim_(dim), values_(horizon * dim, fill) {}

ActionSeries::ActionSeries(std::size_t horizon, std::size_t dim, std::vector<double> values)
    : horizon_(horizon), dim_(dim), values_(std::move(values)) {
  if (values_.size() != horizon_ * dim_)
    throw DimensionError("ActionSeries: value count " + std::to_string(values_.size()) +
                         " does not match " + std::to_string(horizon_) + "x" + std::to_string(dim_));
}

ActionSeries ActionSeries::from_points(std::span<const Point2> points) {
  ActionSeries a(points.size(), 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    a(i, 0) = points[i].x;
    a(i, 1) = points[i].y;
  }
  return a;
}

std::vector<Point2> ActionSeries::points() const {
  std::vector<Point2> pts(horizon_);
  for (std::size_t i = 0; i < horizon_; ++i) pts[i] = point(i);
  return pts;
}

bool ActionSeries::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ActionSeries sample_prior(std::size_t horizon, std::size_t dim, Rng& rng) {
  ActionSeries a(horizon, dim);
  for (double& v : a.flat()) v = rng.normal();
  return a;
}

ActionSeries interpolate_state(const ActionSeries& source, const ActionSeries& target, double t) {
  require_same_shape(source, target, "interpolate_state");
  if (!(t >= 0.0 && t <= 1.0)) throw DimensionError("interpolate_state: t must lie in [0, 1]");
  ActionSeries out(source.horizon(), source.dim());
  const auto s = source.flat();
  const auto g = target.flat();
  auto o = out.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (1.0 - t) * s[i] + t * g[i];
  return out;
}

ActionSeries target_field(const ActionSeries& source, const ActionSeries& target) {
  require_same_shape(source, target, "target_field");
  ActionSeries out(source.horizon(), source.dim());
  const auto s = source.flat();
  const auto g = target.flat();
  auto o = out.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = g[i] - s[i];
  return out;
}

LossAndGrads fm_loss_and_grads(const nnet::VectorFieldNet& net, std::span<const TrainSample> batch) {
  if (batch.empty()) throw DimensionError("fm_loss_and_grads: empty batch");
  nnet::Matrix inputs(batch.size(), net.input_dim());
  nnet::Matrix targets(batch.size(), net.output_dim());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const TrainSample& s = batch[b];
    const ActionSeries state = interpolate_state(s.source, s.target, s.t);
    const ActionSeries u = target_field(s.source, s.target);
    if (u.size() != net.output_dim())
      throw DimensionError("fm_loss_and_grads: action series size does not match the network");
    net.embed(state.flat(), s.t, s.obs.flatten(), inputs.row(b));
    std::copy(u.flat().begin(), u.flat().end(), targets.row(b).begin());
  }
  BatchEval eval = evaluate_batch(net, inputs, targets);
  if (!std::isfinite(eval.loss)) throw NumericError("fm_loss_and_grads: non-finite loss");
  LossAndGrads out;
  out.loss = eval.loss;
  out.grads = loss_gradients(net, eval);
  return out;
}

TrainResult train(nnet::VectorFieldNet& net, std::span<const TrainPair> pairs,
                  const TrainConfig& config, std::uint64_t seed, const EpochCallback& on_epoch) {
  if (pairs.empty()) throw DimensionError("train: empty demonstration set");
  if (config.batch_size == 0) throw ConfigError("train: batch_size must be > 0");
  const std::size_t horizon = pairs.front().actions.horizon();
  const std::size_t dim = pairs.front().actions.dim();
  for (const TrainPair& p : pairs) {
    if (p.actions.horizon() != horizon || p.actions.dim() != dim)
      throw DimensionError("train: inconsistent horizons in demonstration set");
  }
  if (horizon * dim != net.output_dim())
    throw DimensionError("train: demonstration action size does not match the network");

  Rng rng(seed);
  nnet::AdamState adam = nnet::AdamState::for_params(net.params(), config.learning_rate,
                                                     config.beta1, config.beta2, config.epsilon);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t batches_per_epoch = (pairs.size() + config.batch_size - 1) / config.batch_size;
  const double total_steps = static_cast<double>(batches_per_epoch * config.epochs);
  auto lr_at = [&](std::size_t step) {
    if (config.schedule == LrSchedule::constant) return config.learning_rate;
    const double progress = static_cast<double>(step) / total_steps;
    const double floor = config.final_lr_fraction;
    return config.learning_rate *
           (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
  };

  TrainResult result;
  result.epoch_loss.reserve(config.epochs);
  std::vector<double> source(horizon * dim);
  std::vector<double> state(horizon * dim);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - begin);
      nnet::Matrix inputs(count, net.input_dim());
      nnet::Matrix targets(count, net.output_dim());
      for (std::size_t b = 0; b < count; ++b) {
        const TrainPair& pair = pairs[order[begin + b]];
        const double t = rng.uniform();
        for (double& v : source) v = rng.normal();
        const auto a1 = pair.actions.flat();
        auto u = targets.row(b);
        for (std::size_t j = 0; j < source.size(); ++j) {
          state[j] = (1.0 - t) * source[j] + t * a1[j];
          u[j] = a1[j] - source[j];
        }
        net.embed(state, t, pair.obs.flatten(), inputs.row(b));
      }

      BatchEval eval;
      try {
        eval = evaluate_batch(net, inputs, targets);
      } catch (const NumericError& e) {
        throw NumericError("train: divergence at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      if (!std::isfinite(eval.loss))
        throw NumericError("train: divergence at epoch " + std::to_string(epoch) +
                           " (non-finite loss)");
      loss_sum += eval.loss;
      ++batches;
      const nnet::Gradients grads = loss_gradients(net, eval);
      adam.learning_rate = lr_at(adam.step);
      nnet::adam_step(adam, net.mutable_params(), grads);
    }
    const double mean_loss = loss_sum / static_cast<double>(batches);
    result.epoch_loss.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch, mean_loss);
  }
  if (!net.params().all_finite())
    throw NumericError("train: parameters became non-finite");
  return result;
}

void InferenceConfig::validate() const {
  if (steps < 1) throw ConfigError("inference: steps must be >= 1");
  if (!(guidance_weight >= 0.0) || !std::isfinite(guidance_weight))
    throw ConfigError("inference: guidance weight must be finite and >= 0");
  if (waypoint_dim == 0) throw ConfigError("inference: waypoint_dim must be > 0");
}

ActionSeries integrate(const nnet::VectorFieldNet& net, const Observation& obs,
                       ActionSeries state, const InferenceConfig& config,
                       const GuidanceProvider* field) {
  config.validate();
  if (state.size() != net.output_dim())
    throw DimensionError("integrate: initial state size does not match the network");
  const double dt = 1.0 / static_cast<double>(config.steps);
  const double lambda = config.guidance_weight;
  const bool guided = field != nullptr && lambda != 0.0;
  const std::vector<double> obs_flat = obs.flatten();

  for (std::size_t i = 0; i < config.steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    std::vector<double> v;
    try {
      v = nnet::net_forward(net, state.flat(), t, obs_flat);
    } catch (const NumericError& e) {
      throw NumericError("integrate: non-finite field at step " + std::to_string(i) + ": " +
                         e.what());
    }
    auto a = state.flat();
    if (guided && i >= config.guidance_from_step) {
      const ActionSeries phi = field->gradient(state);
      if (!phi.same_shape(state))
        throw DimensionError("integrate: guidance gradient shape differs from the state");
      if (!phi.all_finite())
        throw NumericError("integrate: non-finite guidance gradient at step " + std::to_string(i));
      const auto g = phi.flat();
      for (std::size_t j = 0; j < a.size(); ++j) a[j] += (v[j] + lambda * g[j]) * dt;
    } else {
      for (std::size_t j = 0; j < a.size(); ++j) a[j] += v[j] * dt;
    }
    if (!state.all_finite())
      throw NumericError("integrate: non-finite state at step " + std::to_string(i));
  }
  return state;
}

namespace {

ActionSeries draw_initial(const nnet::VectorFieldNet& net, const InferenceConfig& config, Rng& rng) {
  config.validate();
  if (net.output_dim() % config.waypoint_dim != 0)
    throw DimensionError("sample: network output is not a whole number of waypoints");
  return sample_prior(net.output_dim() / config.waypoint_dim, config.waypoint_dim, rng);
}

}  // namespace

ActionSeries sample_plain(const nnet::VectorFieldNet& net, const Observation& obs,
                          const InferenceConfig& config, Rng& rng) {
  return integrate(net, obs, draw_initial(net, config, rng), config, nullptr);
}

ActionSeries sample_guided(const nnet::VectorFieldNet& net, const Observation& obs,
                           const InferenceConfig& config, const GuidanceProvider& field, Rng& rng) {
  return integrate(net, obs, draw_initial(net, config, rng), config, &field);
}

}  // namespace pf2mp
