// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "pf2mp/flowmatch.hpp"
#include "pf2mp/mazeworld.hpp"
#include "pf2mp/potential.hpp"

namespace pf2mp {
namespace {

struct Fixture {
  nnet::VectorFieldNet net;
  PotentialField field;
  Observation obs;
};

Fixture make_fixture() {
  const DemoSet demos = gen_demoset(MazeWorld::large_like(), 200, 1);
  KdeModel kde = build_kde(demos.normalized_waypoints(), 2, 3000, BandwidthRule::fixed(0.3), 2);
  PotentialConfig cfg;
  cfg.alpha = -0.01;
  return {nnet::VectorFieldNet(nnet::NetConfig{}, 1), build_potential_field(std::move(kde), cfg),
          {{-0.6, -0.5}, {0.7, 0.4}}};
}

void BM_SamplePlain(benchmark::State& state) {
  const Fixture f = make_fixture();
  InferenceConfig cfg;
  cfg.steps = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(sample_plain(f.net, f.obs, cfg, rng));
}
BENCHMARK(BM_SamplePlain)->Arg(5)->Arg(20);

void BM_SampleGuided(benchmark::State& state) {
  const Fixture f = make_fixture();
  const PotentialGuidance guidance(f.field);
  InferenceConfig cfg;
  cfg.steps = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(sample_guided(f.net, f.obs, cfg, guidance, rng));
}
BENCHMARK(BM_SampleGuided)->Arg(5)->Arg(20);

}  // namespace
}  // namespace pf2mp

BENCHMARK_MAIN();
