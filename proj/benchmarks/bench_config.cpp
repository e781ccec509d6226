#include <benchmark/benchmark.h>

#include "skewlab/experiment/config.hpp"

using namespace skewlab::experiment;

static void BM_ParseConfig(benchmark::State& state) {
  ExperimentConfig c;
  c.name = "ay_decay";
  c.deltas = {0.02, 0.05, 0.1};
  const std::string text = serialize(c);
  for (auto _ : state) benchmark::DoNotOptimize(parse_config(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseConfig);

static void BM_SerializeConfig(benchmark::State& state) {
  const ExperimentConfig c;
  for (auto _ : state) benchmark::DoNotOptimize(serialize(c));
}
BENCHMARK(BM_SerializeConfig);

BENCHMARK_MAIN();
