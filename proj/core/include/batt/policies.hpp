#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "batt/bandit.hpp"
#include "batt/env.hpp"
#include "batt/rng.hpp"

namespace batt {

enum class PolicyKind { opportunistic_ts, classic_ts, classic_ucb, baseline, oracle };

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::oracle, PolicyKind::opportunistic_ts,
                                              PolicyKind::classic_ts, PolicyKind::classic_ucb,
                                              PolicyKind::baseline};

std::string_view to_string(PolicyKind kind) noexcept;
// Throws ContractViolation on an unknown name.
PolicyKind parse_policy(std::string_view name);

// What the learner is told after measuring a cell.
enum class RewardRule {
  threshold_indicator,    // 1{X >= m_hat}, observable by the agent
  environment_bernoulli,  // Bernoulli(1 - g(X)) drawn by the environment
};
std::string_view to_string(RewardRule rule) noexcept;
RewardRule parse_reward_rule(std::string_view name);

/// Everything the handover simulator needs about the world.
struct HandoverEnv {
  FailureCurve serving_curve;  // f
  FailureCurve target_curve;   // g
  NeighborCellSet cells;
  ServingTraceParams trace;

  void validate() const;
};

struct PolicyParams {
  Dbm m_hat = -120.0;
  Dbm c = 4.0;
  // Episodes start at the first trace value below this; m_hat + 2c if unset.
  std::optional<Dbm> trigger;
  double ucb_alpha = 2.0;
  BetaPosterior prior{};
  RewardRule reward_rule = RewardRule::threshold_indicator;
  // Maximum measurements per user; 0 means K.
  std::size_t measurement_budget = 0;

  Dbm effective_trigger() const noexcept { return trigger.value_or(m_hat + 2.0 * c); }
  void validate() const;
};

/// Learning state carried across users within one campaign.
struct LearningState {
  std::vector<BetaPosterior> posteriors;
  std::vector<ArmStats> stats;
  std::uint64_t total_pulls = 0;
  std::uint64_t updates = 0;

  static LearningState fresh(std::size_t cells, BetaPosterior prior);
  void update(std::size_t cell, bool reward);
};

/// The randomness one user experiences, shared by every policy so that
/// compared policies differ only through their decisions.
struct UserScenario {
  std::vector<Dbm> serving_trace;
  std::size_t start_index = 0;       // first trace value below the trigger
  std::vector<Dbm> cell_signal;      // X_k if cell k gets measured
  std::vector<double> reward_uniform;  // per-cell uniforms for the Bernoulli reward rule
  RngStream outcome_rng;             // handover outcome draws

  // Serving signal observed with the n-th measurement (0-based). Clamped to
  // the last trace value when the trace is exhausted.
  Dbm serving_at(std::size_t n) const noexcept;
};

// Builds user `user` of trial `trial` from `seed` with dedicated sub-streams
// for the trace, each cell's signal, the reward uniforms and the outcome.
UserScenario make_scenario(const HandoverEnv& env, const PolicyParams& params, std::uint64_t seed,
                           std::uint64_t trial, std::uint64_t user);

/// Per-user measurement loop state.
struct EpisodeState {
  std::size_t n = 0;
  Dbm y_current = std::numeric_limits<double>::infinity();
  Dbm x_best = -std::numeric_limits<double>::infinity();
  std::optional<std::size_t> best_cell;
  std::vector<bool> measured;  // B as a membership mask
  Dbm m_hat = -120.0;
  Dbm c = 4.0;

  static EpisodeState start(std::size_t cells, Dbm m_hat, Dbm c);
  bool exhausted() const noexcept { return n == measured.size(); }
};

enum class Decision { measure, free_measure, handover };
std::string_view to_string(Decision d) noexcept;

// The opportunistic branch guards, evaluated on the current state.
Decision opportunistic_decision(const EpisodeState& state) noexcept;
// The benchmark rule: hand over once the best target beats the serving cell.
bool classic_handover_due(const EpisodeState& state) noexcept;

struct MeasurementStep {
  std::size_t cell = 0;
  Dbm x = 0.0;
  Dbm y = 0.0;              // serving signal received with this measurement
  Dbm y_at_decision = 0.0;  // serving signal the decision was based on
  Dbm x_best_at_decision = 0.0;
  bool free = false;
  bool reward = false;
};

struct EpisodeResult {
  std::size_t handover_target = 0;
  Dbm x_at_handover = 0.0;
  Dbm y_at_handover = 0.0;
  std::size_t n_measurements = 0;
  std::size_t free_measurements = 0;
  bool success = false;
  bool forced = false;  // handed over because every cell was measured
  std::vector<MeasurementStep> steps;
};

// Next cell to measure among those not in `measured`. Throws
// ContractViolation when every cell is measured.
std::size_t select_next_cell(PolicyKind policy, const LearningState& learning,
                             const std::vector<bool>& measured, const NeighborCellSet& cells,
                             double ucb_alpha, RngStream& rng);

EpisodeResult run_episode_opportunistic(const UserScenario& scenario, const HandoverEnv& env,
                                        const PolicyParams& params, LearningState& learning,
                                        RngStream& policy_rng);

// `policy` must not be opportunistic_ts.
EpisodeResult run_episode_baseline(PolicyKind policy, const UserScenario& scenario,
                                   const HandoverEnv& env, const PolicyParams& params,
                                   LearningState& learning, RngStream& policy_rng);

// Dispatches on `policy`.
EpisodeResult run_episode(PolicyKind policy, const UserScenario& scenario, const HandoverEnv& env,
                          const PolicyParams& params, LearningState& learning,
                          RngStream& policy_rng);

// Opportunistic TS restricted to a single measurement: one TS pick, then
// handover to it.
EpisodeResult opportunistic_ts_budget1(const UserScenario& scenario, const HandoverEnv& env,
                                       const PolicyParams& params, LearningState& learning,
                                       RngStream& policy_rng);

}  // namespace batt
