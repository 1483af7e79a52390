#include <benchmark/benchmark.h>

#include "votersim/pde.hpp"

using namespace votersim;

static void BM_line_solver(benchmark::State& state) {
  const double dx = 1.0 / static_cast<double>(state.range(0));
  Grid1D g = Grid1D::make(-50, 50, dx, 1.0);
  RealPoly f({0, 1, -1});
  for (auto _ : state) benchmark::DoNotOptimize(solve_rd_1d(f, [](double x) { return x < 0 ? 1.0 : 0.0; }, 5.0, g));
}
BENCHMARK(BM_line_solver)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_wave_speed(benchmark::State& state) {
  WaveOptions o;
  o.T = 20;
  RealPoly f({0, -0.3, 1.3, -1});
  for (auto _ : state) benchmark::DoNotOptimize(wave_speed(f, o).speed);
}
BENCHMARK(BM_wave_speed)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
