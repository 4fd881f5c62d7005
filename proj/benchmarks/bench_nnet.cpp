// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "pf2mp/flowmatch.hpp"
#include "pf2mp/nnet.hpp"

namespace pf2mp {
namespace {

nnet::VectorFieldNet default_net() { return nnet::VectorFieldNet(nnet::NetConfig{}, 1); }

void BM_NetForward(benchmark::State& state) {
  const nnet::VectorFieldNet net = default_net();
  Rng rng(2);
  const ActionSeries a = sample_prior(80, 2, rng);
  const std::vector<double> obs{0.1, -0.2, 0.5, 0.4};
  for (auto _ : state) benchmark::DoNotOptimize(nnet::net_forward(net, a.flat(), 0.3, obs));
}
BENCHMARK(BM_NetForward);

// One training minibatch: forward, loss and backward.
void BM_LossAndGradients(benchmark::State& state) {
  const nnet::VectorFieldNet net = default_net();
  Rng rng(3);
  std::vector<TrainSample> batch(static_cast<std::size_t>(state.range(0)));
  for (TrainSample& s : batch) {
    s.obs = {{rng.uniform(-1, 1), rng.uniform(-1, 1)}, {rng.uniform(-1, 1), rng.uniform(-1, 1)}};
    s.source = sample_prior(80, 2, rng);
    s.target = sample_prior(80, 2, rng);
    s.t = rng.uniform();
  }
  for (auto _ : state) benchmark::DoNotOptimize(fm_loss_and_grads(net, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGradients)->Arg(1)->Arg(64);

void BM_AdamStep(benchmark::State& state) {
  nnet::VectorFieldNet net = default_net();
  const nnet::Gradients grads = net.params();
  nnet::AdamState adam = nnet::AdamState::for_params(net.params(), 1e-6, 0.9, 0.999, 1e-8);
  for (auto _ : state) nnet::adam_step(adam, net.mutable_params(), grads);
}
BENCHMARK(BM_AdamStep);

}  // namespace
}  // namespace pf2mp
