#include <benchmark/benchmark.h>

#include "batt/bandit.hpp"
#include "batt/policies.hpp"
#include "batt/rng.hpp"
#include "batt/threshold.hpp"

using namespace batt;

namespace {

HandoverEnv bench_env() {
  const FailureCurve curve({{-135.0, 0.8}, {-124.0, 0.3}, {-118.0, 0.05}, {-105.0, 0.01}, {-95.0, 0.0}});
  HandoverEnv env{curve, curve, {}, {-104.0, 1.2, 1.0, 4.0, 40}};
  const double rates[] = {0.76, 0.88, 0.90, 0.91, 0.92, 0.93, 0.94, 0.95, 0.97};
  for (int k = 0; k < 9; ++k) env.cells.cells.push_back({-126.0 + 1.5 * k, 4.0, rates[k]});
  return env;
}

void BM_posterior_sample(benchmark::State& state) {
  RngStream rng(1, 1);
  const BetaPosterior post{1.0 + static_cast<double>(state.range(0)), 3.0};
  for (auto _ : state) benchmark::DoNotOptimize(posterior_sample(post, rng));
}
BENCHMARK(BM_posterior_sample)->Arg(0)->Arg(100)->Arg(100000);

void BM_run_episode(benchmark::State& state) {
  const auto env = bench_env();
  const PolicyParams params;
  const auto policy = static_cast<PolicyKind>(state.range(0));
  auto learning = LearningState::fresh(env.cells.size(), params.prior);
  RngStream rng(2, 2);
  std::uint64_t user = 0;
  for (auto _ : state) {
    const auto scenario = make_scenario(env, params, 3, 0, user++);
    benchmark::DoNotOptimize(run_episode(policy, scenario, env, params, learning, rng));
  }
}
BENCHMARK(BM_run_episode)
    ->Arg(static_cast<int>(PolicyKind::opportunistic_ts))
    ->Arg(static_cast<int>(PolicyKind::classic_ts))
    ->Arg(static_cast<int>(PolicyKind::baseline));

void BM_eps_binary_search_first(benchmark::State& state) {
  const std::size_t arms = 81;
  std::vector<Dbm> levels(arms);
  std::vector<double> probs(arms);
  for (std::size_t j = 0; j < arms; ++j) {
    levels[j] = -140.0 + static_cast<double>(j);
    probs[j] = 0.5 + 0.5 * static_cast<double>(j) / static_cast<double>(arms - 1);
  }
  const ThresholdGrid grid(levels, probs);
  const SearchConfig cfg{arms, static_cast<std::uint64_t>(state.range(0)), 0.97, 0.2};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    RngStream rng(seed++, 0);
    benchmark::DoNotOptimize(eps_binary_search_first(cfg, grid, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_eps_binary_search_first)->Arg(25000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
