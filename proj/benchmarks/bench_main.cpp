// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "atomsplit/experiment.hpp"
#include "atomsplit/integrator.hpp"
#include "atomsplit/oracle.hpp"
#include "atomsplit/sampler.hpp"

namespace {

using namespace atomsplit;

ModelParams preset_model(double chi) {
  ModelParams m;
  m.n_atoms = 200;
  m.nonlinearity = Schedule(chi);
  return m;
}

void BM_Step(benchmark::State& state) {
  const ModelParams model = preset_model(1e-3);
  IntegratorConfig cfg;
  cfg.scheme = static_cast<Scheme>(state.range(0));
  PhasePoint p = sample_initial(model, SubstreamKey{1, 0});
  const NoiseDraws noise{0.01, -0.02, 0.015, 0.0, -0.01, 0.02};
  for (auto _ : state) {
    PhasePoint q = step(p, model, cfg, noise);
    benchmark::DoNotOptimize(q);
  }
}
BENCHMARK(BM_Step)->Arg(static_cast<int>(Scheme::euler_maruyama))->Arg(static_cast<int>(Scheme::semi_implicit_midpoint));

void BM_Trajectory(benchmark::State& state) {
  const ModelParams model = preset_model(1e-3);
  IntegratorConfig cfg;
  cfg.t_final = 1.0;
  std::uint64_t i = 0;
  for (auto _ : state) {
    TrajectoryRecord rec = integrate_trajectory({7, i++}, model, cfg);
    benchmark::DoNotOptimize(rec);
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Trajectory)->Unit(benchmark::kMillisecond);

void BM_Accumulate(benchmark::State& state) {
  const ModelParams model = preset_model(1e-3);
  IntegratorConfig cfg;
  cfg.t_final = 1.0;
  const TrajectoryRecord rec = integrate_trajectory({7, 0}, model, cfg);
  MomentAccumulator acc(sample_times(cfg), 64);
  std::uint64_t i = 0;
  for (auto _ : state) acc.accumulate(rec, i++);
}
BENCHMARK(BM_Accumulate);

void BM_OracleEvolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto states = evolve(fock_state({0, n, 0}), Schedule(1.0), Schedule(1e-3), 0.1, 1.0);
    benchmark::DoNotOptimize(states);
  }
}
BENCHMARK(BM_OracleEvolve)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
