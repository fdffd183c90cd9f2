// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include "ccl/mcengine.hpp"

using namespace ccl;

static void BM_WalkOracle(benchmark::State& st) {
  const Dist d = Dist::atomic({{1.0, 0.3}, {2.0, 0.3}, {5.0, 0.2}});
  const bool parallel = st.range(1) != 0;
  for (auto _ : st) {
    WalkOracle o(d, st.range(0), parallel);
    benchmark::DoNotOptimize(o.table().data());
  }
}
BENCHMARK(BM_WalkOracle)->ArgsProduct({{256, 1024, 4096}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_EstimateTailSerial(benchmark::State& st) {
  const Dist d = Dist::uniform(1.0);
  const SeedStream s{1, 0, 0, 0};
  for (auto _ : st) benchmark::DoNotOptimize(estimate_tail_serial(d, st.range(0), 3.0, 100'000, s).hits);
}
BENCHMARK(BM_EstimateTailSerial)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_EstimateTailParallel(benchmark::State& st) {
  const Dist d = Dist::uniform(1.0);
  const SeedStream s{1, 0, 0, 0};
  for (auto _ : st) benchmark::DoNotOptimize(estimate_tail(d, st.range(0), 3.0, 100'000, s).hits);
}
BENCHMARK(BM_EstimateTailParallel)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
