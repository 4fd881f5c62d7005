// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

// Demonstration-derived potential
//   phi(a) = min(log p(a), cap) + alpha * d(a, H),   alpha < 0,
// where H is represented by the demonstration points whose estimated density
// reaches a quantile threshold. The guidance field of an action series is the
// per-waypoint gradient of phi.

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "pf2mp/density.hpp"
#include "pf2mp/flowmatch.hpp"

namespace pf2mp {

struct SafeSet {
  std::vector<double> anchors;  // K x dim
  std::size_t dim = 0;
  double threshold = 0.0;       // log-density units
  double quantile = 0.0;

  std::size_t size() const { return dim == 0 ? 0 : anchors.size() / dim; }
  std::span<const double> anchor(std::size_t i) const { return {anchors.data() + i * dim, dim}; }
  bool operator==(const SafeSet&) const = default;
};

// Linear-interpolated q-quantile (numpy "linear") of `values`.
double quantile_linear(std::vector<double> values, double q);

// threshold = q-quantile of the model's log-density at its own points;
// anchors = points at or above the threshold, in model order.
SafeSet build_safe_set(const KdeModel& kde, double q);

struct NearestAnchor {
  double distance = 0.0;
  std::vector<double> nearest;
};

// Exhaustive nearest-anchor scan; ties resolve to the lowest index.
NearestAnchor distance_to_safe(const SafeSet& safe, std::span<const double> a);

struct PotentialField {
  KdeModel kde;
  SafeSet safe;
  double alpha = -1.0;
  double log_density_cap = std::numeric_limits<double>::infinity();

  // alpha < 0, dimensions agree, safe set non-empty.
  void validate() const;
  bool operator==(const PotentialField&) const = default;
};

enum class CapMode { threshold, none, value };

struct PotentialConfig {
  double quantile = 0.05;
  double alpha = -1.0;
  CapMode cap_mode = CapMode::threshold;
  double cap_value = 0.0;  // used when cap_mode == value
};

PotentialField build_potential_field(KdeModel kde, const PotentialConfig& config);

double potential(const PotentialField& field, std::span<const double> a);

// grad log p (zero where the cap is active) + alpha * (a - nearest) / |a - nearest|,
// with the distance term zero at distance 0.
std::vector<double> potential_gradient(const PotentialField& field, std::span<const double> a);

// Row tau of the result is potential_gradient(field, row tau of A).
ActionSeries field_over_series(const PotentialField& field, const ActionSeries& actions);

// Adapts a PotentialField to the sampler's guidance interface.
class PotentialGuidance final : public GuidanceProvider {
 public:
  explicit PotentialGuidance(const PotentialField& field) : field_(&field) {}
  ActionSeries gradient(const ActionSeries& state) const override {
    return field_over_series(*field_, state);
  }

 private:
  const PotentialField* field_;
};

}  // namespace pf2mp
