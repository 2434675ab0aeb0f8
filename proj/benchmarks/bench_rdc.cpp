#include <benchmark/benchmark.h>

#include "bench_data.hpp"
#include "scorescope/monitor.hpp"
#include "scorescope/rdc.hpp"

using namespace scorescope;

static void BM_BuildRdc(benchmark::State& state) {
  const auto scores = bench::bimodal(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_rdc(scores));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildRdc)->Arg(1000)->Arg(100000);

static void BM_Diagnose(benchmark::State& state) {
  const auto rdc = build_rdc(bench::bimodal(10000), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(diagnose(rdc));
}
BENCHMARK(BM_Diagnose)->Arg(100)->Arg(1000);

static void BM_WindowedMonitor(benchmark::State& state) {
  const auto scores = bench::bimodal(100000);
  std::vector<ScoreRecord> records(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    records[i].model_id = i % 2 ? "a" : "b";
    records[i].score = scores[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(windowed_rdcs(records, MonitorConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_WindowedMonitor)->Unit(benchmark::kMillisecond);
