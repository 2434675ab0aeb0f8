#include <benchmark/benchmark.h>

#include "bench_data.hpp"
#include "scorescope/construction.hpp"

using namespace scorescope;

static void BM_TrainLogistic(benchmark::State& state) {
  const auto ds = bench::selection(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(train_logistic(ds.features, ds.target));
}
BENCHMARK(BM_TrainLogistic)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_Auc(benchmark::State& state) {
  const auto ds = bench::selection(100000);
  std::vector<double> scores(ds.features.rows());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = ds.features(i, 1);
  for (auto _ : state) benchmark::DoNotOptimize(auc(scores, ds.target));
}
BENCHMARK(BM_Auc)->Unit(benchmark::kMillisecond);

// One full probe at the default 200 permutations.
static void BM_BiasProbe(benchmark::State& state) {
  const auto ds = bench::selection(2000);
  for (auto _ : state) benchmark::DoNotOptimize(bias_severity(ds.features, ds.target));
}
BENCHMARK(BM_BiasProbe)->Unit(benchmark::kMillisecond)->Iterations(3);
