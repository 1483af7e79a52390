#include <benchmark/benchmark.h>

#include "votersim/engine.hpp"
#include "votersim/model.hpp"

using namespace votersim;

static void BM_lv_graphical(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  Torus torus(3, side);
  ModelSpec m = build_lv(-1, -1, 1.0 / side, nn_kernel(3));
  Configuration xi0 = Configuration::bernoulli(torus, 0.5, 1);
  std::uint64_t seed = 1;
  std::size_t events = 0;
  for (auto _ : state) {
    SimResult r = simulate_forward(m, xi0, 0.1, seed++, Backend::graphical);
    events += r.events;
    benchmark::DoNotOptimize(r.final);
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_lv_graphical)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_lv_direct(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  Torus torus(3, side);
  ModelSpec m = build_lv(-1, -1, 1.0 / side, nn_kernel(3));
  Configuration xi0 = Configuration::bernoulli(torus, 0.5, 1);
  std::uint64_t seed = 1;
  std::size_t events = 0;
  for (auto _ : state) {
    SimResult r = simulate_forward(m, xi0, 0.1, seed++, Backend::direct);
    events += r.events;
    benchmark::DoNotOptimize(r.final);
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_lv_direct)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
