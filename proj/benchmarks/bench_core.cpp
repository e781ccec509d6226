#include <benchmark/benchmark.h>

#include "skewlab/acim.hpp"
#include "skewlab/branch.hpp"
#include "skewlab/error.hpp"
#include "skewlab/expansion.hpp"
#include "skewlab/hyperbolic_times.hpp"
#include "skewlab/markov.hpp"
#include "skewlab/rng.hpp"

using namespace skewlab;

namespace {

const MapSequence& logistic_seq() {
  static const MapSequence seq = MapSequence::constant(families::logistic());
  return seq;
}

void BM_Ftle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ftle_fiber(logistic_seq(), 0.123, n));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Ftle)->Arg(1000)->Arg(100000);

void BM_TrackBranch(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    CounterRng rng(1, i++);
    benchmark::DoNotOptimize(track_branch(logistic_seq(), rng.uniform(0.01, 0.99), n));
  }
}
BENCHMARK(BM_TrackBranch)->Arg(5)->Arg(20);

void BM_EmpiricalMeasure(benchmark::State& state) {
  const System sys = System::interval(families::logistic());
  const auto grid = BinGrid::for_system(sys, 256);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_measure(sys, 1000, 1000, grid, 1));
  state.SetItemsProcessed(state.iterations() * 1000 * 1000);
}
BENCHMARK(BM_EmpiricalMeasure)->Unit(benchmark::kMillisecond);

void BM_Pliss(benchmark::State& state) {
  CounterRng rng(2, 0);
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = rng.uniform(-1.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(pliss_times({v, 0.1, 0.3, 2.0}));
}
BENCHMARK(BM_Pliss)->Arg(1000)->Arg(100000);

void BM_InducingTime(benchmark::State& state) {
  const auto f = families::logistic();
  const auto part = build_partition(f, 1);
  const int N = markov_start_depth(f, part);
  std::uint64_t i = 0;
  for (auto _ : state) {
    CounterRng rng(3, i++);
    try {
      benchmark::DoNotOptimize(inducing_time(f, part, rng.uniform(0.01, 0.99), N, 60));
    } catch (const Error&) {
    }
  }
}
BENCHMARK(BM_InducingTime);

void BM_AssembleMarkov(benchmark::State& state) {
  const auto f = families::logistic();
  const auto part = build_partition(f, 1);
  const int N = markov_start_depth(f, part);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_markov(f, part, 1000, N, 60, 1));
}
BENCHMARK(BM_AssembleMarkov)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
