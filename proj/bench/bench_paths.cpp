#include <benchmark/benchmark.h>

#include <omp.h>

#include "polybranch/discrete.hpp"
#include "polybranch/montecarlo.hpp"

using namespace polybranch;

namespace {

const Mechanism& quad() {
  static const Mechanism m = Mechanism::quadratic(-1.0, 1.0, 1.5);
  return m;
}

McOptions opts() {
  McOptions o;
  o.dt = 1e-2;
  return o;
}

void BM_PathsSerial(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(run_paths_serial(quad(), 1.0, 20.0, n, 7, opts()));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_PathsParallel(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(run_paths(quad(), 1.0, 20.0, n, 7, opts()));
  st.SetItemsProcessed(st.iterations() * st.range(0));
  st.counters["threads"] = omp_get_max_threads();
}

void BM_ChainSerial(benchmark::State& st) {
  ChainSpec cs = build_approx_sequence(Mechanism::quadratic(1.0, 1.0, 1.5), 50.0);
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(rescaled_marginal_serial(cs, 1.0, 1.0, n, 7));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_ChainParallel(benchmark::State& st) {
  ChainSpec cs = build_approx_sequence(Mechanism::quadratic(1.0, 1.0, 1.5), 50.0);
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(rescaled_marginal(cs, 1.0, 1.0, n, 7));
  st.SetItemsProcessed(st.iterations() * st.range(0));
  st.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(BM_PathsSerial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PathsParallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChainSerial)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChainParallel)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
