#include <benchmark/benchmark.h>

#include "votersim/coalesce.hpp"

using namespace votersim;

static void BM_pair_meeting(benchmark::State& state) {
  Kernel k = nn_kernel(3);
  Stream rng(1, 0, StreamKind::walks);
  const double cutoff = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pair_meeting_time(k, {1, 0, 0}, cutoff, rng));
}
BENCHMARK(BM_pair_meeting)->Arg(100)->Arg(10000);

static void BM_partition_law(benchmark::State& state) {
  Kernel k = nn_kernel(3);
  OffspringLaw q = independent_pair_law(k);
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_nu0(q, k, 1e4, 1000, seed++));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_partition_law)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
