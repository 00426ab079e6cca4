#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "echosim/dataset.hpp"
#include "echosim/dynamics.hpp"
#include "echosim/metrics.hpp"
#include "echosim/mitigation.hpp"
#include "echosim/theory.hpp"

using namespace echosim;

namespace {

void BM_SimulateStep(benchmark::State& state) {
  const auto data = generate_synthetic(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 10,
                                       static_cast<std::size_t>(state.range(0)) * 10, 1);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto r = simulate_step(data.initial, data.catalog, data.graph, ModelParams{}, {++seed});
    benchmark::DoNotOptimize(r.states.users.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateStep)->Args({100, 1000})->Args({1000, 10000})->Unit(benchmark::kMillisecond);

void BM_SampleSlate(benchmark::State& state) {
  const auto m = state.range(0);
  const Vector p = Vector::Constant(m, 1.0 / static_cast<double>(m));
  Rng rng(3);
  for (auto _ : state) {
    auto s = sample_without_replacement(p, 20, rng);
    benchmark::DoNotOptimize(s.items.data());
  }
}
BENCHMARK(BM_SampleSlate)->Arg(1000)->Arg(10000);

void BM_DppRerank(benchmark::State& state) {
  const auto data = generate_synthetic(1, 1000, 10, 0, 2);
  std::vector<int> pool(1000);
  std::iota(pool.begin(), pool.end(), 0);
  const Vector u = data.initial.users.col(0);
  for (auto _ : state) {
    auto slate = dpp_rerank(u, pool, data.catalog, 0.501, 20);
    benchmark::DoNotOptimize(slate.data());
  }
}
BENCHMARK(BM_DppRerank);

void BM_PdvExact(benchmark::State& state) {
  const auto data = generate_synthetic(static_cast<int>(state.range(0)), 10, 10, 0, 4);
  for (auto _ : state) benchmark::DoNotOptimize(pdv(data.initial.users).value);
}
BENCHMARK(BM_PdvExact)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_TsAtK(benchmark::State& state) {
  const auto data = generate_synthetic(static_cast<int>(state.range(0)), 10, 10, 0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(ts_at_k(data.initial.users, 50));
}
BENCHMARK(BM_TsAtK)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_FixedPoint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto data = generate_synthetic(n, 500, 5, static_cast<std::size_t>(n) * 5, 6);
  ModelParams p;
  p.eta = 0.05;
  p.beta = 1.0;
  p.alpha = 1.0;
  p.epsilon = 0.2;
  const OperatorSet ops = build_operators(data.catalog, data.graph, p);
  FixedPointOptions options;
  options.dense_limit = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(fixed_point(ops, options).residual);
}
BENCHMARK(BM_FixedPoint)->Args({50, 2000})->Args({50, 0})->Args({400, 0})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
