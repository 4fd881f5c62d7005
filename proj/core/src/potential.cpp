// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include "pf2mp/potential.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pf2mp/errors.hpp"

namespace pf2mp {
namespace {

void require_finite(std::span<const double> a, const char* what) {
  for (double v : a)
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": query is not finite");
}

}  // namespace

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw DimensionError("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

SafeSet build_safe_set(const KdeModel& kde, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("build_safe_set: quantile must lie in (0, 1)");
  const std::size_t m = kde.size();
  std::vector<double> logs(m);
  for (std::size_t i = 0; i < m; ++i) logs[i] = kde.log_density(kde.point(i));

  SafeSet safe;
  safe.dim = kde.dim();
  safe.quantile = q;
  safe.threshold = quantile_linear(logs, q);
  for (std::size_t i = 0; i < m; ++i) {
    if (logs[i] >= safe.threshold) {
      const auto p = kde.point(i);
      safe.anchors.insert(safe.anchors.end(), p.begin(), p.end());
    }
  }
  if (safe.size() == 0) throw NumericError("build_safe_set: no point reaches the density threshold");
  return safe;
}

NearestAnchor distance_to_safe(const SafeSet& safe, std::span<const double> a) {
  if (a.size() != safe.dim) throw DimensionError("distance_to_safe: dimension mismatch");
  require_finite(a, "distance_to_safe");
  if (safe.size() == 0) throw DimensionError("distance_to_safe: empty safe set");
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  const std::size_t k = safe.size();
  for (std::size_t i = 0; i < k; ++i) {
    const double* x = safe.anchors.data() + i * safe.dim;
    double sq = 0.0;
    for (std::size_t j = 0; j < safe.dim; ++j) {
      const double d = a[j] - x[j];
      sq += d * d;
    }
    if (sq < best_sq) {
      best_sq = sq;
      best = i;
    }
  }
  const auto p = safe.anchor(best);
  return {std::sqrt(best_sq), std::vector<double>(p.begin(), p.end())};
}

void PotentialField::validate() const {
  if (!(alpha < 0.0)) throw ConfigError("potential field: alpha must be < 0");
  if (safe.dim != kde.dim()) throw DimensionError("potential field: safe set and KDE dimensions differ");
  if (safe.size() == 0) throw DimensionError("potential field: empty safe set");
  if (std::isnan(log_density_cap)) throw NumericError("potential field: cap is NaN");
}

PotentialField build_potential_field(KdeModel kde, const PotentialConfig& config) {
  SafeSet safe = build_safe_set(kde, config.quantile);
  double cap = std::numeric_limits<double>::infinity();
  switch (config.cap_mode) {
    case CapMode::threshold:
      cap = safe.threshold;
      break;
    case CapMode::none:
      break;
    case CapMode::value:
      cap = config.cap_value;
      break;
  }
  PotentialField field{std::move(kde), std::move(safe), config.alpha, cap};
  field.validate();
  return field;
}

double potential(const PotentialField& field, std::span<const double> a) {
  require_finite(a, "potential");
  const double log_p = std::min(field.kde.log_density(a), field.log_density_cap);
  return log_p + field.alpha * distance_to_safe(field.safe, a).distance;
}

std::vector<double> potential_gradient(const PotentialField& field, std::span<const double> a) {
  require_finite(a, "potential_gradient");
  DensityEval density = field.kde.evaluate(a);
  std::vector<double> grad = std::move(density.grad);
  if (density.log_density >= field.log_density_cap) std::fill(grad.begin(), grad.end(), 0.0);

  const NearestAnchor near = distance_to_safe(field.safe, a);
  if (near.distance > 0.0) {
    const double scale = field.alpha / near.distance;
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += scale * (a[k] - near.nearest[k]);
  }
  return grad;
}

ActionSeries field_over_series(const PotentialField& field, const ActionSeries& actions) {
  if (actions.dim() != field.kde.dim())
    throw DimensionError("field_over_series: waypoint dimension differs from the field");
  ActionSeries out(actions.horizon(), actions.dim());
  for (std::size_t tau = 0; tau < actions.horizon(); ++tau) {
    const std::vector<double> g = potential_gradient(field, actions.row(tau));
    std::copy(g.begin(), g.end(), out.row(tau).begin());
  }
  return out;
}

}  // namespace pf2mp
