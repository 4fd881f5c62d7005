// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

// Conditional flow matching with the straight-line (rectified) interpolant:
// the training target is the constant velocity A1 - A0, and generation
// integrates the learned field with explicit Euler, optionally adding a
// weighted guidance gradient at every step.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pf2mp/nnet.hpp"
#include "pf2mp/rng.hpp"

namespace pf2mp {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
double norm(Point2 p);
double distance(Point2 a, Point2 b);

// Agent and goal positions in normalized coordinates.
struct Observation {
  Point2 agent_pos;
  Point2 goal_pos;

  std::vector<double> flatten() const { return {agent_pos.x, agent_pos.y, goal_pos.x, goal_pos.y}; }
  bool operator==(const Observation&) const = default;
};

// horizon x dim waypoints, row-major.
class ActionSeries {
 public:
  ActionSeries() = default;
  ActionSeries(std::size_t horizon, std::size_t dim, double fill = 0.0);
  ActionSeries(std::size_t horizon, std::size_t dim, std::vector<double> values);
  static ActionSeries from_points(std::span<const Point2> points);

  std::size_t horizon() const { return horizon_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t step, std::size_t axis) { return values_[step * dim_ + axis]; }
  double operator()(std::size_t step, std::size_t axis) const { return values_[step * dim_ + axis]; }

  std::span<double> row(std::size_t step) { return {values_.data() + step * dim_, dim_}; }
  std::span<const double> row(std::size_t step) const { return {values_.data() + step * dim_, dim_}; }

  // Only meaningful for dim == 2.
  Point2 point(std::size_t step) const { return {(*this)(step, 0), (*this)(step, 1)}; }
  std::vector<Point2> points() const;

  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }

  bool same_shape(const ActionSeries& other) const {
    return horizon_ == other.horizon_ && dim_ == other.dim_;
  }
  bool all_finite() const;
  bool operator==(const ActionSeries&) const = default;

 private:
  std::size_t horizon_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

// Standard-normal draw per flattened entry.
ActionSeries sample_prior(std::size_t horizon, std::size_t dim, Rng& rng);

// (1 - t) * source + t * target.
ActionSeries interpolate_state(const ActionSeries& source, const ActionSeries& target, double t);

// target - source, independent of t.
ActionSeries target_field(const ActionSeries& source, const ActionSeries& target);

struct TrainSample {
  Observation obs;
  ActionSeries target;  // A1
  ActionSeries source;  // A0
  double t = 0.0;
};

struct LossAndGrads {
  double loss = 0.0;
  nnet::Gradients grads;
};

// Mean over the batch of ||v(A_t, t; o) - (A1 - A0)||^2 with exact gradients.
LossAndGrads fm_loss_and_grads(const nnet::VectorFieldNet& net, std::span<const TrainSample> batch);

// One (observation, demonstrated action series) pair in normalized coordinates.
struct TrainPair {
  Observation obs;
  ActionSeries actions;
};

enum class LrSchedule { constant, cosine };

struct TrainConfig {
  std::size_t epochs = 300;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  // cosine: decays from learning_rate to final_lr_fraction * learning_rate
  // over all optimizer steps.
  LrSchedule schedule = LrSchedule::constant;
  double final_lr_fraction = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean minibatch loss per epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// Minibatch flow-matching training. One epoch is one shuffled pass over
// `pairs`; every sample gets a fresh t ~ U[0,1] and A0 ~ N(0, I).
// Deterministic given `seed`. Throws NumericError naming the epoch if the
// loss becomes non-finite.
TrainResult train(nnet::VectorFieldNet& net, std::span<const TrainPair> pairs,
                  const TrainConfig& config, std::uint64_t seed,
                  const EpochCallback& on_epoch = {});

// Supplies the per-waypoint guidance gradient for a whole action series.
class GuidanceProvider {
 public:
  virtual ~GuidanceProvider() = default;
  virtual ActionSeries gradient(const ActionSeries& state) const = 0;
};

struct InferenceConfig {
  std::size_t steps = 5;          // N
  double guidance_weight = 0.8;   // lambda
  std::size_t guidance_from_step = 0;  // guidance is skipped on steps i < this
  std::size_t waypoint_dim = 2;

  void validate() const;
};

// Euler integration from a given prior draw. `field` may be null, in which
// case the update is the plain flow step.
ActionSeries integrate(const nnet::VectorFieldNet& net, const Observation& obs,
                       ActionSeries initial, const InferenceConfig& config,
                       const GuidanceProvider* field);

// A0 ~ N(0, I) from rng, then A <- A + v(A, t; o) dt for N uniform steps.
ActionSeries sample_plain(const nnet::VectorFieldNet& net, const Observation& obs,
                          const InferenceConfig& config, Rng& rng);

// A <- A + [v(A, t; o) + lambda * Phi(A)] dt.
ActionSeries sample_guided(const nnet::VectorFieldNet& net, const Observation& obs,
                           const InferenceConfig& config, const GuidanceProvider& field, Rng& rng);

}  // namespace pf2mp
