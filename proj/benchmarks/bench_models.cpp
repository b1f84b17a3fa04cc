// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "mcharvest/harvest.hpp"
#include "mcharvest/layout.hpp"
#include "mcharvest/pbs.hpp"
#include "mcharvest/release.hpp"
#include "mcharvest/rx.hpp"
#include "mcharvest/specfun.hpp"

using namespace mcharvest;

static void BM_SolveEigenvalues(benchmark::State& state) {
  const TxParams tx;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_eigenvalues(tx, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_SolveEigenvalues)->Arg(100)->Arg(1000);

static void BM_ReleaseRate(benchmark::State& state) {
  const ReleaseModel m(TxParams{});
  double t = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.release_rate(t));
    t = t > 3.0 ? 1e-3 : t + 1e-3;
  }
}
BENCHMARK(BM_ReleaseRate);

static void BM_Convolve(benchmark::State& state) {
  const TimeGrid g = TimeGrid::covering(3.0, 3.0 / static_cast<double>(state.range(0)));
  const ReleaseModel rel(TxParams{});
  const HarvestModel h(TxParams{}, ChannelParams{}, 2.0);
  const SignalTrace a = rel.release_trace(g);
  const SignalTrace b = h.impulse_trace(g);
  for (auto _ : state) {
    benchmark::DoNotOptimize(convolve(a, b, Quantity::HarvestFractionCumulative));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Convolve)->Arg(1000)->Arg(3000)->Arg(10000)->Complexity();

static void BM_ObservationComponents(benchmark::State& state) {
  const TxParams tx;
  const RxModel m(tx, ChannelParams{}, fibonacci_layout(11, 0.1, tx.radius));
  const TimeGrid g = TimeGrid::covering(3.0, 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(m.observation_components(g));
}
BENCHMARK(BM_ObservationComponents)->Unit(benchmark::kMillisecond);

static void BM_PbsRealization(benchmark::State& state) {
  const TxParams tx;
  const ChannelParams ch;
  const auto layout = fibonacci_layout(11, 0.1, tx.radius);
  PbsRunConfig cfg;
  cfg.dt = 1e-5;
  cfg.horizon = 0.5;
  cfg.realizations = 1;
  cfg.sample_every = 1000;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(simulate(tx, ch, layout, cfg));
  }
}
BENCHMARK(BM_PbsRealization)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
