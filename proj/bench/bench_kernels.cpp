// Serial reference vs OpenMP kernels on the three grid workloads.

#include <vector>

#include <benchmark/benchmark.h>

#include "qsense/sensitivity.hpp"
#include "qsense/shot_lab.hpp"

using namespace qsense;

namespace {

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

void BM_Sweep(benchmark::State& state) {
  const auto ratios = linspace(0.5, 10.0, 12);
  const auto vx = linspace(0.0, 1.0, 41);
  SimulationOptions opts;
  opts.execution = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(sweep_improvement(ratios, vx, Mode::per_shot, 1.0, opts));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ratios.size() * vx.size()));
}

void BM_Miscalibration(benchmark::State& state) {
  const auto axis = miscalibration_axis(0.3, 41);
  const auto p = DecoherenceParams::from_t1_over_t2(1.0);
  SimulationOptions opts;
  opts.execution = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(miscalibration_grid(p, axis, axis, Mode::per_root_time, opts));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(axis.size() * axis.size()));
}

void BM_Shots(benchmark::State& state) {
  const auto p = DecoherenceParams::from_t1_over_t2(1.0);
  SweepOptions opts;
  opts.plan.shots = 1000;  // inversion sampler
  opts.iterations = 200;
  opts.t2_drift = 0.05;
  opts.execution = exec_of(state);
  const auto deltas = default_detunings();
  for (auto _ : state) benchmark::DoNotOptimize(run_detuning_sweep(InitialState::from_vx(0.6), p, deltas, opts, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(2 * opts.iterations * deltas.size()));
}

}  // namespace

// Argument 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Miscalibration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Shots)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
