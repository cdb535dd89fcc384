#include <benchmark/benchmark.h>

#include <vector>

#include "gwsim/brs.hpp"
#include "gwsim/engine.hpp"
#include "gwsim/law.hpp"

using namespace gwsim;

static void BM_OffspringTotal(benchmark::State& state) {
  const auto law = OffspringLaw::poisson(1.5);
  const auto z = static_cast<std::uint64_t>(state.range(0));
  const SamplerOptions opts{kDefaultPopulationCap, state.range(1) ? SamplingMode::Monotone : SamplingMode::Fast};
  RandomStream rng({1, 0, Stream::Reproduction});
  for (auto _ : state) benchmark::DoNotOptimize(sample_offspring_total(law, z, rng, opts));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_OffspringTotal)->ArgsProduct({{1, 64, 1000, 100000}, {0, 1}});

static void BM_ExtinctionProbability(benchmark::State& state) {
  const auto law = OffspringLaw::geometric(0.6);
  for (auto _ : state) benchmark::DoNotOptimize(extinction_probability(law).q);
}
BENCHMARK(BM_ExtinctionProbability);

static void BM_TruncatedBatch(benchmark::State& state) {
  BatchSpec spec{.law = OffspringLaw::explicit_pmf({{0, 0.25}, {2, 0.75}})};
  spec.policy = policies::Truncation{IntegerFunction::logarithmic(2.0, 3.0, Rounding::Ceil, 0.0, 1)};
  spec.horizon = 500;
  spec.trials = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(spec).extinction_fraction);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TruncatedBatch)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_StoppingTime(benchmark::State& state) {
  RandomStream rng({2, 0, Stream::Claims});
  std::vector<double> claims(static_cast<std::size_t>(state.range(0)));
  for (auto& c : claims) c = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(stopping_time(claims, 1.0));
}
BENCHMARK(BM_StoppingTime)->Arg(100)->Arg(10000);

static void BM_Threshold(benchmark::State& state) {
  const Population pop{{{100, ClaimDistribution::uniform(1.0)}, {50, ClaimDistribution::exponential(2.0)}}, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(solve_threshold(pop));
}
BENCHMARK(BM_Threshold);

BENCHMARK_MAIN();
