#include "batt/threshold.hpp"

#include <cmath>
#include <string>

#include "batt/error.hpp"

namespace batt {
namespace {

// Per-arm reward streams keyed off one draw of the caller's stream. Searchers
// handed equal streams therefore see the same reward sequence on every arm.
class ArmPuller {
 public:
  ArmPuller(const ThresholdGrid& grid, RewardModel model, RngStream& rng)
      : grid_(grid), model_(model), key_(rng.next_u64()) {
    streams_.reserve(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) streams_.emplace_back(key_, j);
  }

  double pull(std::size_t arm) {
    if (model_ == RewardModel::noiseless) return grid_.success_prob(arm);
    return pull_threshold_arm(grid_, arm, streams_[arm]) ? 1.0 : 0.0;
  }

  // Noiseless arms report their exact mean; summing n copies of it can round.
  double estimate(std::size_t arm, double sum, std::uint64_t n) const {
    if (model_ == RewardModel::noiseless) return grid_.success_prob(arm);
    return sum / static_cast<double>(n);
  }

 private:
  const ThresholdGrid& grid_;
  RewardModel model_;
  std::uint64_t key_;
  std::vector<RngStream> streams_;
};

struct RunTally {
  std::vector<std::uint64_t> pulls;
  std::uint64_t round = 0;
  std::vector<RoundRecord>* log = nullptr;
};

double pull_and_log(const ThresholdGrid& grid, ArmPuller& puller, RunTally& tally,
                    std::size_t arm, Phase phase) {
  const double reward = puller.pull(arm);
  if (!tally.pulls.empty()) ++tally.pulls[arm];
  if (tally.log != nullptr) {
    tally.log->push_back({tally.round, arm, grid.levels()[arm], reward, phase});
  }
  ++tally.round;
  return reward;
}

ArmSearchResult search_impl(const ThresholdGrid& grid, std::uint64_t pulls, double threshold,
                            std::size_t start, std::size_t end, ArmPuller& puller,
                            RunTally& tally, std::uint64_t round_budget) {
  ArmSearchResult result;
  // 1-based bounds as signed values so "end < start" after j - 1 is representable.
  long long lo = static_cast<long long>(start) + 1;
  long long hi = static_cast<long long>(end) + 1;
  while (hi >= lo && result.rounds_used < round_budget) {
    const std::size_t j1 =
        binary_search_midpoint(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
    const std::size_t arm = j1 - 1;
    SearchStep step;
    step.start = static_cast<std::size_t>(lo - 1);
    step.end = static_cast<std::size_t>(hi - 1);
    step.arm = arm;
    double sum = 0.0;
    while (step.pulls < pulls && result.rounds_used < round_budget) {
      sum += pull_and_log(grid, puller, tally, arm, Phase::explore);
      ++step.pulls;
      ++result.rounds_used;
    }
    step.estimate = puller.estimate(arm, sum, step.pulls);
    step.judged_sufficient = step.estimate >= threshold;
    result.steps.push_back(step);
    if (step.judged_sufficient) {
      hi = static_cast<long long>(j1) - 1;
    } else {
      lo = static_cast<long long>(j1) + 1;
    }
  }
  return result;
}

void fill_metrics(ThresholdRunStats& stats, const ThresholdGrid& grid, double threshold,
                  std::uint64_t rounds) {
  stats.optimal_arm = true_optimal_arm(grid, threshold);
  const Dbm z_m = grid.levels()[stats.optimal_arm];
  stats.violations = 0;
  stats.cum_signed_diff = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto n = stats.pulls[j];
    if (n == 0) continue;
    if (grid.success_probs()[j] < threshold) stats.violations += n;
    stats.cum_signed_diff += static_cast<double>(n) * (grid.levels()[j] - z_m);
  }
  stats.coarse_regret = rounds - stats.pulls[stats.optimal_arm];
}

void exploit(const ThresholdGrid& grid, ArmPuller& puller, RunTally& tally, std::size_t arm,
             std::uint64_t rounds) {
  while (tally.round < rounds) pull_and_log(grid, puller, tally, arm, Phase::exploit);
}

}  // namespace

std::uint64_t SearchConfig::pulls_per_arm() const noexcept {
  const double budget = epsilon * static_cast<double>(rounds);
  if (arms < 2) return static_cast<std::uint64_t>(std::floor(budget));
  return static_cast<std::uint64_t>(std::floor(budget / std::log2(static_cast<double>(arms))));
}

void SearchConfig::validate() const {
  require(arms >= 1, "search needs at least one arm");
  require(rounds >= 1, "search needs at least one round");
  require(threshold >= 0.0 && threshold <= 1.0, "threshold R must lie in [0,1]");
  require(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0,1]");
  require(pulls_per_arm() >= 1,
          "pulls per arm P = floor(eps T / log2 J) must be at least 1 (eps=" +
              std::to_string(epsilon) + ", T=" + std::to_string(rounds) + ")");
}

std::string_view to_string(Phase phase) noexcept {
  return phase == Phase::explore ? "explore" : "exploit";
}

std::size_t binary_search_midpoint(std::size_t start, std::size_t end) noexcept {
  // ceil(start + (end - start) / 2) for end >= start.
  return start + (end - start + 1) / 2;
}

ArmSearchResult binary_arm_search(const ThresholdGrid& grid, std::uint64_t pulls, double threshold,
                                  std::size_t start, std::size_t end, RewardModel model,
                                  RngStream& rng, std::vector<RoundRecord>* log,
                                  std::uint64_t round_budget) {
  require(pulls >= 1, "binary_arm_search needs at least one pull per arm");
  require(start < grid.size(), "binary_arm_search start out of range");
  require(end < grid.size() || end + 1 == start,
          "binary_arm_search end out of range");
  ArmPuller puller(grid, model, rng);
  RunTally tally;
  tally.log = log;
  if (end + 1 == start) return {};
  return search_impl(grid, pulls, threshold, start, end, puller, tally, round_budget);
}

std::size_t select_closest_sufficient(std::span<const ArmEstimate> candidates, double threshold) {
  require(!candidates.empty(), "arm selection needs at least one candidate");
  const ArmEstimate* best = nullptr;
  for (const auto& c : candidates) {
    if (c.estimate < threshold) continue;
    const double gap = c.estimate - threshold;
    if (best == nullptr || gap < best->estimate - threshold ||
        (gap == best->estimate - threshold && c.arm < best->arm)) {
      best = &c;
    }
  }
  if (best != nullptr) return best->arm;
  // Nothing clears the threshold: fall back to the largest estimate.
  for (const auto& c : candidates) {
    if (best == nullptr || c.estimate > best->estimate ||
        (c.estimate == best->estimate && c.arm < best->arm)) {
      best = &c;
    }
  }
  return best->arm;
}

std::size_t true_optimal_arm(const ThresholdGrid& grid, double threshold) {
  const auto probs = grid.success_probs();
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] >= threshold) return j;
  }
  throw NoSufficientArm("no arm reaches success threshold " + std::to_string(threshold));
}

ThresholdRunStats eps_binary_search_first(const SearchConfig& cfg, const ThresholdGrid& grid,
                                          RngStream& rng, bool record_rounds) {
  cfg.validate();
  require(cfg.arms == grid.size(), "search config arm count differs from grid size");
  ThresholdRunStats stats;
  stats.pulls.assign(grid.size(), 0);
  ArmPuller puller(grid, cfg.reward_model, rng);
  RunTally tally;
  tally.pulls.assign(grid.size(), 0);
  if (record_rounds) {
    stats.rounds.reserve(cfg.rounds);
    tally.log = &stats.rounds;
  }

  auto search = search_impl(grid, cfg.pulls_per_arm(), cfg.threshold, 0, grid.size() - 1, puller,
                            tally, cfg.rounds);
  stats.exploration_rounds = search.rounds_used;
  std::vector<ArmEstimate> estimates;
  for (const auto& step : search.steps) {
    stats.searched.push_back(step.arm);
    estimates.push_back({step.arm, step.estimate});
  }
  stats.trace = std::move(search.steps);
  stats.selected_arm = select_closest_sufficient(estimates, cfg.threshold);
  exploit(grid, puller, tally, stats.selected_arm, cfg.rounds);
  stats.pulls = std::move(tally.pulls);
  fill_metrics(stats, grid, cfg.threshold, cfg.rounds);
  return stats;
}

ThresholdRunStats uniform_search_first(const SearchConfig& cfg, const ThresholdGrid& grid,
                                       RngStream& rng, bool record_rounds) {
  require(cfg.arms == grid.size(), "search config arm count differs from grid size");
  require(cfg.rounds >= 1 && cfg.epsilon > 0.0 && cfg.epsilon <= 1.0,
          "uniform search needs T >= 1 and eps in (0,1]");
  const auto per_arm = static_cast<std::uint64_t>(
      std::floor(cfg.epsilon * static_cast<double>(cfg.rounds) / static_cast<double>(cfg.arms)));
  require(per_arm >= 1, "uniform search needs eps T >= J");

  ThresholdRunStats stats;
  ArmPuller puller(grid, cfg.reward_model, rng);
  RunTally tally;
  tally.pulls.assign(grid.size(), 0);
  if (record_rounds) {
    stats.rounds.reserve(cfg.rounds);
    tally.log = &stats.rounds;
  }

  std::vector<ArmEstimate> estimates;
  estimates.reserve(grid.size());
  for (std::size_t arm = 0; arm < grid.size(); ++arm) {
    double sum = 0.0;
    for (std::uint64_t i = 0; i < per_arm; ++i) {
      sum += pull_and_log(grid, puller, tally, arm, Phase::explore);
    }
    estimates.push_back({arm, puller.estimate(arm, sum, per_arm)});
    stats.searched.push_back(arm);
  }
  stats.exploration_rounds = tally.round;
  stats.selected_arm = select_closest_sufficient(estimates, cfg.threshold);
  exploit(grid, puller, tally, stats.selected_arm, cfg.rounds);
  stats.pulls = std::move(tally.pulls);
  fill_metrics(stats, grid, cfg.threshold, cfg.rounds);
  return stats;
}

std::uint64_t coarse_regret(std::span<const std::uint64_t> pulls, std::size_t m_index) {
  require(m_index < pulls.size(), "coarse_regret: optimal arm index out of range");
  std::uint64_t total = 0;
  for (auto n : pulls) total += n;
  return total - pulls[m_index];
}

std::uint64_t coarse_regret(const ThresholdRunStats& stats, std::size_t m_index) {
  return coarse_regret(stats.pulls, m_index);
}

}  // namespace batt
