#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "batt/env.hpp"
#include "batt/rng.hpp"

namespace batt {

// How an arm pull produces its reward.
enum class RewardModel {
  bernoulli,  // 0/1 draw with the arm's success probability
  noiseless,  // the success probability itself, no randomness
};

/// Parameters shared by the threshold searchers.
struct SearchConfig {
  std::size_t arms = 1;        // J
  std::uint64_t rounds = 1;    // T
  double threshold = 0.97;     // R, on the success scale
  double epsilon = 0.1;        // exploration fraction in (0, 1]
  RewardModel reward_model = RewardModel::bernoulli;

  // P = floor(eps * T / log2 J) for J >= 2, floor(eps * T) for J = 1.
  std::uint64_t pulls_per_arm() const noexcept;
  // Throws ContractViolation on J = 0, T = 0, R outside [0,1], eps outside
  // (0,1] or P = 0.
  void validate() const;
};

enum class Phase { explore, exploit };
std::string_view to_string(Phase phase) noexcept;

struct RoundRecord {
  std::uint64_t round = 0;  // 0-based
  std::size_t arm = 0;      // 0-based
  Dbm z = 0.0;
  double reward = 0.0;      // 0/1 under the Bernoulli model
  Phase phase = Phase::explore;
};

/// One visited node of Binary-Arm-Search.
struct SearchStep {
  std::size_t start = 0;  // inclusive, 0-based
  std::size_t end = 0;    // inclusive, 0-based
  std::size_t arm = 0;
  std::uint64_t pulls = 0;
  double estimate = 0.0;  // empirical mean over `pulls`
  bool judged_sufficient = false;
};

struct ArmSearchResult {
  std::vector<SearchStep> steps;  // in visiting order
  std::uint64_t rounds_used = 0;
};

// Binary-Arm-Search over the inclusive 0-based range [start, end]. The
// midpoint is ceil(start + (end - start) / 2) in 1-based terms, which keeps the
// left bias of the original recursion on even-length ranges. Each visited arm
// is pulled `pulls` times unless `round_budget` runs out first. When `log` is
// non-null every pull is appended to it.
ArmSearchResult binary_arm_search(const ThresholdGrid& grid, std::uint64_t pulls, double threshold,
                                  std::size_t start, std::size_t end, RewardModel model,
                                  RngStream& rng, std::vector<RoundRecord>* log = nullptr,
                                  std::uint64_t round_budget =
                                      std::numeric_limits<std::uint64_t>::max());

// 1-based midpoint formula of Binary-Arm-Search, exposed for tests.
std::size_t binary_search_midpoint(std::size_t start_1based, std::size_t end_1based) noexcept;

struct ArmEstimate {
  std::size_t arm = 0;
  double estimate = 0.0;
};

// Among estimates >= threshold pick the one closest to it; lowest arm index
// breaks ties. If none qualifies pick the largest estimate (lowest index on
// ties). Throws ContractViolation on an empty candidate list.
std::size_t select_closest_sufficient(std::span<const ArmEstimate> candidates, double threshold);

// Smallest index with success_prob >= threshold; throws NoSufficientArm.
std::size_t true_optimal_arm(const ThresholdGrid& grid, double threshold);

struct ThresholdRunStats {
  std::vector<std::uint64_t> pulls;      // per arm, sums to T
  std::vector<std::size_t> searched;     // explored arms in visiting order
  std::vector<SearchStep> trace;         // search steps (empty for uniform)
  std::size_t selected_arm = 0;
  std::size_t optimal_arm = 0;           // M from the true means
  std::uint64_t exploration_rounds = 0;
  std::uint64_t violations = 0;          // rounds pulling an arm with r < R
  double cum_signed_diff = 0.0;          // sum of Z_pulled - Z_M
  std::uint64_t coarse_regret = 0;       // T - pulls[M]
  std::vector<RoundRecord> rounds;       // filled when recording is requested
};

ThresholdRunStats eps_binary_search_first(const SearchConfig& cfg, const ThresholdGrid& grid,
                                          RngStream& rng, bool record_rounds = false);

// Requires floor(eps * T / J) >= 1.
ThresholdRunStats uniform_search_first(const SearchConfig& cfg, const ThresholdGrid& grid,
                                       RngStream& rng, bool record_rounds = false);

// T - pulls[m_index]; requires m_index < pulls.size().
std::uint64_t coarse_regret(const ThresholdRunStats& stats, std::size_t m_index);
std::uint64_t coarse_regret(std::span<const std::uint64_t> pulls, std::size_t m_index);

}  // namespace batt
