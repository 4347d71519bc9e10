#include <benchmark/benchmark.h>

#include <random>

#include "hjbpath/hamiltonian.hpp"
#include "hjbpath/solver.hpp"
#include "hjbpath/terrain.hpp"
#include "hjbpath/trajectory.hpp"

using namespace hjbpath;

namespace {

const Box kBox{0.0, 4.0, 0.0, 3.0};

ElevationField mountains(std::size_t n) {
  return make_synthetic({kBox, n + 1, n * 3 / 4 + 1},
                        GaussianMountains{{{{1.7, 1.3}, 1.0, 0.4}, {{2.3, 1.9}, 1.0, 0.4}}});
}

SolverConfig config(std::size_t n, double T, double sigma) {
  SolverConfig c;
  c.box = kBox;
  c.N = n;
  c.M = n * 3 / 4;
  c.T = T;
  c.sigma = sigma;
  c.x_end = {3.5, 1.5};
  return enforce_cfl(c, SpeedModel{});
}

void BM_Godunov(benchmark::State& state) {
  const SpeedModel model;
  HamiltonianConfig cfg;
  cfg.n_directions = static_cast<std::size_t>(state.range(0));
  const LocalHamiltonian h(model, {0.03, -0.02}, DirectionSet(cfg.n_directions));
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<OneSidedDiffs> diffs(256);
  for (auto& d : diffs) d = {u(gen), u(gen), u(gen), u(gen)};
  std::size_t n = 0;
  for (auto _ : state) benchmark::DoNotOptimize(godunov(h.view(), diffs[n++ & 255], cfg));
}
BENCHMARK(BM_Godunov)->Arg(16)->Arg(64)->Arg(256);

void BM_ExplicitStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ElevationField f = mountains(n);
  const SolverConfig c = config(n, 1.0, 0.0);
  const HjbStepper stepper(c, f, SpeedModel{});
  Slice u = terminal_condition(c);
  for (auto _ : state) {
    Slice next = stepper.step_explicit(u);
    benchmark::DoNotOptimize(next.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(u.size()));
}
BENCHMARK(BM_ExplicitStep)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SemiImplicitStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ElevationField f = mountains(n);
  const SolverConfig c = config(n, 1.0, 0.5);
  const HjbStepper stepper(c, f, SpeedModel{});
  Slice u = terminal_condition(c);
  for (auto _ : state) {
    Slice next = stepper.step_semi_implicit(u);
    benchmark::DoNotOptimize(next.data());
  }
}
BENCHMARK(BM_SemiImplicitStep)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Ensemble(benchmark::State& state) {
  const ElevationField f = mountains(60);
  const SolverConfig c = config(60, 3.8, 0.2);
  const ValueFunction vf = solve(c, f, SpeedModel{});
  const ControlField cf(vf, f, SpeedModel{});
  EnsembleOptions opts;
  opts.trials = static_cast<std::size_t>(state.range(0));
  opts.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(cf, {0.5, 1.5}, opts).num_trials);
}
BENCHMARK(BM_Ensemble)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
