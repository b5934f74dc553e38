#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "levyfdt/fokker_planck.hpp"
#include "levyfdt/grid.hpp"
#include "levyfdt/model.hpp"
#include "levyfdt/nonlocal.hpp"
#include "levyfdt/rng.hpp"
#include "levyfdt/simulate.hpp"
#include "levyfdt/stable.hpp"

using namespace levyfdt;

static void BM_SampleStable(benchmark::State& state) {
  const StableParams params(1.5);
  RngStream stream(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_stable(params, n, stream));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleStable)->Arg(1 << 16);

static void BM_EulerPath(benchmark::State& state) {
  const auto model = models::tanh_well();
  IntegratorSpec spec;
  spec.t_max = 10.0;
  spec.save_stride = 100;
  RngStream stream(2);
  const std::vector<double> x0{0.0};
  for (auto _ : state) benchmark::DoNotOptimize(integrate_path(model, x0, spec, std::nullopt, stream));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(spec.n_steps()));
}
BENCHMARK(BM_EulerPath);

static void BM_ApplyAdjoint(benchmark::State& state) {
  const Grid1D grid(32.0, static_cast<std::size_t>(state.range(0)));
  const auto model = models::tanh_well();
  const auto phi = GridField::sample(grid, [](double x) { return std::exp(-x * x); });
  for (auto _ : state) benchmark::DoNotOptimize(apply_adjoint(model, phi));
}
BENCHMARK(BM_ApplyAdjoint)->Arg(1024)->Arg(2048)->Arg(8192);

static void BM_SolveStationary(benchmark::State& state) {
  const Grid1D grid(32.0, 2048);
  const auto model = models::tanh_well();
  for (auto _ : state) benchmark::DoNotOptimize(solve_stationary(model, grid));
}
BENCHMARK(BM_SolveStationary)->Unit(benchmark::kSecond)->Iterations(1);

BENCHMARK_MAIN();
