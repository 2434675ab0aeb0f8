#include <benchmark/benchmark.h>

#include "scorescope/blocked.hpp"
#include "scorescope/experiments.hpp"

using namespace scorescope;

static void BM_PairedSimulation(benchmark::State& state) {
  PairedSimConfig cfg;
  cfg.n_users = static_cast<std::size_t>(state.range(0));
  cfg.joint = {0.6, 0.1, 0.2, 0.1};
  cfg.conversion_if_correct = 0.12;
  cfg.conversion_if_wrong = 0.10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_paired_experiment(cfg));
    ++cfg.seed;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PairedSimulation)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_BlockedSimulateAnalyze(benchmark::State& state) {
  BlockedSimConfig cfg;
  cfg.n_users = static_cast<std::size_t>(state.range(0));
  cfg.base_cvr = 0.10;
  cfg.feature_effect = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(analyze_blocked(simulate_blocked(cfg)));
    ++cfg.seed;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BlockedSimulateAnalyze)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_MaxDisagreementGrid(benchmark::State& state) {
  for (auto _ : state) {
    double sum = 0.0;
    for (int i = 50; i <= 100; ++i) {
      for (int j = 50; j <= 100; ++j) sum += max_disagreement(i / 100.0, j / 100.0);
    }
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_MaxDisagreementGrid);
