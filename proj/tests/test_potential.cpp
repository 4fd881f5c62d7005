// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "oracles.hpp"
#include "pf2mp/errors.hpp"
#include "pf2mp/potential.hpp"

namespace pf2mp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> random_points(Rng& rng, std::size_t m, double extent = 1.0) {
  std::vector<double> p(2 * m);
  for (double& v : p) v = rng.uniform(-extent, extent);
  return p;
}

PotentialField random_field(std::uint64_t seed, bool capped) {
  Rng rng(seed);
  KdeModel kde(random_points(rng, 60, 0.8), 2, rng.uniform(0.1, 0.4));
  PotentialConfig cfg;
  cfg.quantile = 0.3;
  cfg.alpha = -rng.uniform(0.1, 2.0);
  cfg.cap_mode = capped ? CapMode::threshold : CapMode::none;
  return build_potential_field(std::move(kde), cfg);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile_linear({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_linear({1.0, 2.0, 3.0, 4.0}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_linear({1.0, 2.0, 3.0, 4.0}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_linear({1.0, 2.0, 3.0, 4.0}, 1.0), 4.0);
  EXPECT_THROW(quantile_linear({}, 0.5), DimensionError);
}

TEST(SafeSet, TinyQuantileKeepsEveryPoint) {
  Rng rng(1);
  const KdeModel kde(random_points(rng, 40), 2, 0.3);
  const SafeSet safe = build_safe_set(kde, 1e-20);
  EXPECT_EQ(safe.size(), 40u);
}

TEST(SafeSet, CollinearPointsKeepInnerHalf) {
  const KdeModel kde({-0.9, 0.0, -0.3, 0.0, 0.3, 0.0, 0.9, 0.0}, 2, 0.5);
  // Inner points have strictly higher density by direct evaluation.
  const double outer = kde.log_density(std::vector<double>{-0.9, 0.0});
  const double inner = kde.log_density(std::vector<double>{-0.3, 0.0});
  ASSERT_GT(inner, outer);
  const SafeSet safe = build_safe_set(kde, 0.5);
  EXPECT_EQ(safe.anchors, (std::vector<double>{-0.3, 0.0, 0.3, 0.0}));
  EXPECT_NEAR(safe.threshold, 0.5 * (inner + outer), 1e-12);
}

TEST(SafeSet, PermutationInvariant) {
  Rng rng(2);
  std::vector<double> pts = random_points(rng, 50);
  const SafeSet a = build_safe_set(KdeModel(pts, 2, 0.25), 0.2);
  std::vector<double> shuffled;
  std::vector<std::size_t> order(50);
  for (std::size_t i = 0; i < 50; ++i) order[i] = (i * 17 + 3) % 50;
  for (std::size_t i : order) shuffled.insert(shuffled.end(), {pts[2 * i], pts[2 * i + 1]});
  const SafeSet b = build_safe_set(KdeModel(shuffled, 2, 0.25), 0.2);
  EXPECT_NEAR(a.threshold, b.threshold, 1e-12);
  std::set<std::pair<double, double>> sa, sb;
  for (std::size_t i = 0; i < a.size(); ++i) sa.emplace(a.anchor(i)[0], a.anchor(i)[1]);
  for (std::size_t i = 0; i < b.size(); ++i) sb.emplace(b.anchor(i)[0], b.anchor(i)[1]);
  EXPECT_EQ(sa, sb);
}

TEST(SafeSet, AnchorsMeetThresholdAndQuantileChecked) {
  Rng rng(3);
  const KdeModel kde(random_points(rng, 80), 2, 0.2);
  const SafeSet safe = build_safe_set(kde, 0.05);
  for (std::size_t i = 0; i < safe.size(); ++i) EXPECT_GE(kde.log_density(safe.anchor(i)), safe.threshold);
  EXPECT_THROW(build_safe_set(kde, 0.0), ConfigError);
  EXPECT_THROW(build_safe_set(kde, 1.0), ConfigError);
}

TEST(DistanceToSafe, MembershipAndThreeFourFive) {
  SafeSet safe{{0.0, 0.0, 1.0, 1.0}, 2, 0.0, 0.5};
  const NearestAnchor at = distance_to_safe(safe, std::vector<double>{1.0, 1.0});
  EXPECT_EQ(at.distance, 0.0);
  EXPECT_EQ(at.nearest, (std::vector<double>{1.0, 1.0}));
  SafeSet origin{{0.0, 0.0}, 2, 0.0, 0.5};
  const NearestAnchor n = distance_to_safe(origin, std::vector<double>{3.0, 4.0});
  EXPECT_EQ(n.distance, 5.0);
  EXPECT_EQ(n.nearest, (std::vector<double>{0.0, 0.0}));
  EXPECT_THROW(distance_to_safe(origin, std::vector<double>{NAN, 0.0}), NumericError);
}

TEST(DistanceToSafe, MatchesExhaustiveScan) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    SafeSet safe;
    safe.dim = 2;
    safe.anchors = random_points(rng, 1 + rng.below(40));
    const std::vector<double> a = random_points(rng, 1, 1.5);
    const NearestAnchor got = distance_to_safe(safe, a);
    const oracle::Nearest ref = oracle::brute_nearest(safe.anchors, 2, a);
    EXPECT_EQ(got.distance, ref.distance);
    EXPECT_EQ(got.nearest[0], safe.anchors[2 * ref.index]);
    EXPECT_EQ(got.nearest[1], safe.anchors[2 * ref.index + 1]);
  }
}

TEST(Potential, SinglePointModeValue) {
  const KdeModel kde({0.0, 0.0}, 2, 1.0);
  const PotentialField field = build_potential_field(kde, PotentialConfig{});
  EXPECT_NEAR(potential(field, std::vector<double>{0.0, 0.0}), -1.8378770664093453, 1e-12);
}

TEST(Potential, ZeroAlphaIsCappedLogDensity) {
  Rng rng(5);
  PotentialField field = random_field(5, true);
  field.alpha = 0.0;
  for (int q = 0; q < 20; ++q) {
    const std::vector<double> a = random_points(rng, 1, 1.2);
    EXPECT_EQ(potential(field, a), std::min(field.kde.log_density(a), field.log_density_cap));
  }
}

TEST(Potential, TermByTermOracle) {
  Rng rng(6);
  const PotentialField field = random_field(6, true);
  for (int q = 0; q < 50; ++q) {
    const std::vector<double> a = random_points(rng, 1, 1.3);
    const double log_p = oracle::naive_log_density(field.kde.points(), 2, field.kde.bandwidth(), a);
    const double d = oracle::brute_nearest(field.safe.anchors, 2, a).distance;
    const double ref = std::min(log_p, field.log_density_cap) + field.alpha * d;
    EXPECT_LT(oracle::relative_error(potential(field, a), ref), 1e-10);
  }
}

TEST(PotentialGradient, HandEvaluatedExample) {
  PotentialField field{KdeModel({0.0, 0.0}, 2, 1.0), SafeSet{{0.0, 0.0}, 2, -1.8378770664093453, 0.05},
                       -2.0, -1.8378770664093453};
  const auto g = potential_gradient(field, std::vector<double>{3.0, 4.0});
  EXPECT_NEAR(g[0], -4.2, 1e-12);
  EXPECT_NEAR(g[1], -5.6, 1e-12);
}

TEST(PotentialGradient, AtAnchorOnlyDensityTerm) {
  const PotentialField field = random_field(7, false);
  const auto anchor = field.safe.anchor(0);
  const auto g = potential_gradient(field, anchor);
  const auto ref = field.kde.grad_log_density(anchor);
  EXPECT_EQ(g, ref);
}

TEST(PotentialGradient, CapZeroesDensityTerm) {
  PotentialField field = random_field(8, true);
  field.log_density_cap = -kInf;
  SafeSet one{{0.0, 0.0}, 2, 0.0, 0.5};
  field.safe = one;
  const auto g = potential_gradient(field, std::vector<double>{0.3, 0.4});
  EXPECT_NEAR(g[0], field.alpha * 0.6, 1e-14);
  EXPECT_NEAR(g[1], field.alpha * 0.8, 1e-14);
}

TEST(PotentialGradient, MatchesFiniteDifferencesAwayFromSafeSet) {
  Rng rng(9);
  for (bool capped : {false, true}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const PotentialField field = random_field(10 + s, capped);
      int checked = 0;
      while (checked < 10) {
        std::vector<double> a = random_points(rng, 1, 1.3);
        if (distance_to_safe(field.safe, a).distance <= 0.01) continue;
        if (capped && std::abs(field.kde.log_density(a) - field.log_density_cap) < 1e-3) continue;
        const auto g = potential_gradient(field, a);
        for (std::size_t k = 0; k < 2; ++k) {
          std::vector<double> p = a, m = a;
          p[k] += 1e-6;
          m[k] -= 1e-6;
          const double fd = (potential(field, p) - potential(field, m)) / 2e-6;
          EXPECT_LT(std::abs(fd - g[k]) / std::max({std::abs(fd), std::abs(g[k]), 1e-3}), 1e-5);
        }
        ++checked;
      }
    }
  }
}

TEST(PotentialGradient, BoundednessAndAttraction) {
  Rng rng(11);
  const PotentialField field = random_field(12, false);
  for (int q = 0; q < 100; ++q) {
    const std::vector<double> a = random_points(rng, 1, 1.5);
    const auto g = potential_gradient(field, a);
    const auto gd = field.kde.grad_log_density(a);
    EXPECT_LE(std::hypot(g[0], g[1]), std::hypot(gd[0], gd[1]) + std::abs(field.alpha) + 1e-12);
    const NearestAnchor near = distance_to_safe(field.safe, a);
    if (near.distance > 0.0) {
      const double dx = a[0] - near.nearest[0], dy = a[1] - near.nearest[1];
      const double term_dot = field.alpha * (dx * dx + dy * dy) / near.distance;
      EXPECT_LT(term_dot, 0.0);
    }
  }
}

TEST(FieldOverSeries, RowsMatchPointwiseGradient) {
  Rng rng(13);
  const PotentialField field = random_field(14, true);
  const ActionSeries a(20, 2, random_points(rng, 20, 1.2));
  const ActionSeries phi = field_over_series(field, a);
  for (std::size_t tau = 0; tau < 20; ++tau) {
    const auto g = potential_gradient(field, a.row(tau));
    EXPECT_EQ(phi(tau, 0), g[0]);
    EXPECT_EQ(phi(tau, 1), g[1]);
  }
  const ActionSeries one(1, 2, std::vector<double>{0.2, 0.3});
  EXPECT_EQ(field_over_series(field, one).flat()[0], potential_gradient(field, one.row(0))[0]);
}

TEST(FieldOverSeries, IdenticalAndPermutedRows) {
  const PotentialField field = random_field(15, true);
  const ActionSeries same(5, 2, std::vector<double>{0.1, 0.2, 0.1, 0.2, 0.1, 0.2, 0.1, 0.2, 0.1, 0.2});
  const ActionSeries phi = field_over_series(field, same);
  for (std::size_t tau = 1; tau < 5; ++tau) EXPECT_EQ(phi.point(tau), phi.point(0));

  Rng rng(16);
  const ActionSeries a(6, 2, random_points(rng, 6));
  ActionSeries rev(6, 2);
  for (std::size_t tau = 0; tau < 6; ++tau) {
    rev(tau, 0) = a(5 - tau, 0);
    rev(tau, 1) = a(5 - tau, 1);
  }
  const ActionSeries pa = field_over_series(field, a), pr = field_over_series(field, rev);
  for (std::size_t tau = 0; tau < 6; ++tau) EXPECT_EQ(pa.point(tau), pr.point(5 - tau));
  EXPECT_THROW(field_over_series(field, ActionSeries(2, 3)), DimensionError);
}

TEST(PotentialField, ValidateRejectsNonNegativeAlpha) {
  PotentialConfig cfg;
  cfg.alpha = 0.0;
  EXPECT_THROW(build_potential_field(KdeModel({0.0, 0.0}, 2, 1.0), cfg), ConfigError);
  cfg.alpha = 0.5;
  EXPECT_THROW(build_potential_field(KdeModel({0.0, 0.0}, 2, 1.0), cfg), ConfigError);
}

TEST(PotentialField, CapModes) {
  Rng rng(17);
  const KdeModel kde(random_points(rng, 30), 2, 0.3);
  PotentialConfig cfg;
  cfg.cap_mode = CapMode::threshold;
  EXPECT_EQ(build_potential_field(kde, cfg).log_density_cap, build_safe_set(kde, cfg.quantile).threshold);
  cfg.cap_mode = CapMode::none;
  EXPECT_EQ(build_potential_field(kde, cfg).log_density_cap, kInf);
  cfg.cap_mode = CapMode::value;
  cfg.cap_value = -3.5;
  EXPECT_EQ(build_potential_field(kde, cfg).log_density_cap, -3.5);
}

}  // namespace
}  // namespace pf2mp
