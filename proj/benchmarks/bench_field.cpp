// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "pf2mp/density.hpp"
#include "pf2mp/mazeworld.hpp"
#include "pf2mp/potential.hpp"

namespace pf2mp {
namespace {

PotentialField maze_field(std::size_t subsample) {
  const DemoSet demos = gen_demoset(MazeWorld::large_like(), 200, 1);
  KdeModel kde = build_kde(demos.normalized_waypoints(), 2, subsample, BandwidthRule::fixed(0.3), 2);
  PotentialConfig cfg;
  cfg.alpha = -0.01;
  return build_potential_field(std::move(kde), cfg);
}

void BM_KdeGradient(benchmark::State& state) {
  const PotentialField field = maze_field(static_cast<std::size_t>(state.range(0)));
  const std::vector<double> a{0.13, -0.42};
  for (auto _ : state) benchmark::DoNotOptimize(field.kde.grad_log_density(a));
}
BENCHMARK(BM_KdeGradient)->Arg(500)->Arg(3000);

void BM_PotentialGradient(benchmark::State& state) {
  const PotentialField field = maze_field(3000);
  const std::vector<double> a{0.13, -0.42};
  for (auto _ : state) benchmark::DoNotOptimize(potential_gradient(field, a));
}
BENCHMARK(BM_PotentialGradient);

void BM_SegmentCollides(benchmark::State& state) {
  const MazeWorld maze = MazeWorld::large_like();
  const Rect b = maze.bounds();
  Rng rng(4);
  std::vector<Point2> pts(1024);
  for (Point2& p : pts) p = {rng.uniform(b.x0, b.x1), rng.uniform(b.y0, b.y1)};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(segment_collides(maze, pts[i % 1024], pts[(i + 1) % 1024]));
    ++i;
  }
}
BENCHMARK(BM_SegmentCollides);

}  // namespace
}  // namespace pf2mp
