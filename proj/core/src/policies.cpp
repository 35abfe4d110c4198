#include "batt/policies.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "batt/error.hpp"

namespace batt {
namespace {

// Labels for the per-user sub-streams of make_scenario.
enum : std::uint64_t { kTraceStream = 1, kCellStream = 2, kRewardStream = 3, kOutcomeStream = 4 };

std::size_t effective_budget(const PolicyParams& params, std::size_t cells) {
  if (params.measurement_budget == 0) return cells;
  return std::min(params.measurement_budget, cells);
}

void measure(std::size_t cell, bool free, const UserScenario& scenario, const HandoverEnv& env,
             const PolicyParams& params, EpisodeState& state, LearningState& learning,
             EpisodeResult& result) {
  MeasurementStep step;
  step.cell = cell;
  step.x = scenario.cell_signal[cell];
  step.y = scenario.serving_at(state.n);
  step.y_at_decision = state.y_current;
  step.x_best_at_decision = state.x_best;
  step.free = free;
  if (params.reward_rule == RewardRule::threshold_indicator) {
    step.reward = step.x >= params.m_hat;
  } else {
    step.reward = scenario.reward_uniform[cell] < 1.0 - env.target_curve.eval(step.x);
  }
  learning.update(cell, step.reward);

  if (step.x > state.x_best) {
    state.x_best = step.x;
    state.best_cell = cell;
  }
  ++state.n;
  state.measured[cell] = true;
  state.y_current = step.y;

  if (free) ++result.free_measurements;
  result.steps.push_back(step);
}

void finish(const UserScenario& scenario, const HandoverEnv& env, const EpisodeState& state,
            EpisodeResult& result) {
  result.handover_target = *state.best_cell;
  result.x_at_handover = state.x_best;
  result.y_at_handover = state.y_current;
  result.n_measurements = state.n;
  RngStream outcome = scenario.outcome_rng;
  result.success = draw_handover_outcome(env.serving_curve, env.target_curve, state.y_current,
                                         state.x_best, outcome);
}

}  // namespace

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::opportunistic_ts: return "opportunistic_ts";
    case PolicyKind::classic_ts: return "classic_ts";
    case PolicyKind::classic_ucb: return "classic_ucb";
    case PolicyKind::baseline: return "baseline";
    case PolicyKind::oracle: return "oracle";
  }
  return "unknown";
}

PolicyKind parse_policy(std::string_view name) {
  for (auto kind : kAllPolicies) {
    if (to_string(kind) == name) return kind;
  }
  throw ContractViolation("unknown policy '" + std::string(name) + "'");
}

std::string_view to_string(RewardRule rule) noexcept {
  return rule == RewardRule::threshold_indicator ? "threshold_indicator" : "environment_bernoulli";
}

RewardRule parse_reward_rule(std::string_view name) {
  if (name == "threshold_indicator") return RewardRule::threshold_indicator;
  if (name == "environment_bernoulli") return RewardRule::environment_bernoulli;
  throw ContractViolation("unknown reward rule '" + std::string(name) + "'");
}

void HandoverEnv::validate() const {
  cells.validate();
  trace.validate();
}

void PolicyParams::validate() const {
  require(std::isfinite(m_hat), "m_hat must be finite");
  require(c >= 0.0 && std::isfinite(c), "policy c must be nonnegative");
  require(ucb_alpha > 0.0, "ucb_alpha must be positive");
  make_posterior(prior.alpha, prior.beta);
  if (trigger) require(std::isfinite(*trigger), "trigger must be finite");
}

LearningState LearningState::fresh(std::size_t cells, BetaPosterior prior) {
  LearningState s;
  s.posteriors.assign(cells, prior);
  s.stats.assign(cells, ArmStats{});
  return s;
}

void LearningState::update(std::size_t cell, bool reward) {
  posteriors[cell] = posterior_update(posteriors[cell], reward);
  stats[cell].record(reward);
  ++total_pulls;
  ++updates;
}

Dbm UserScenario::serving_at(std::size_t n) const noexcept {
  const std::size_t i = std::min(start_index + n, serving_trace.size() - 1);
  return serving_trace[i];
}

UserScenario make_scenario(const HandoverEnv& env, const PolicyParams& params, std::uint64_t seed,
                           std::uint64_t trial, std::uint64_t user) {
  UserScenario s;
  RngStream trace_rng(seed, derive_stream_id({trial, user, kTraceStream}));
  s.serving_trace = gen_serving_trace(env.trace, trace_rng);
  const Dbm trigger = params.effective_trigger();
  s.start_index = 0;
  for (std::size_t i = 0; i < s.serving_trace.size(); ++i) {
    if (s.serving_trace[i] < trigger) {
      s.start_index = i;
      break;
    }
  }
  const std::size_t k_cells = env.cells.size();
  s.cell_signal.resize(k_cells);
  s.reward_uniform.resize(k_cells);
  for (std::size_t k = 0; k < k_cells; ++k) {
    RngStream cell_rng(seed, derive_stream_id({trial, user, kCellStream, k}));
    s.cell_signal[k] = sample_neighbor_signal(env.cells, k, cell_rng);
    RngStream reward_rng(seed, derive_stream_id({trial, user, kRewardStream, k}));
    s.reward_uniform[k] = reward_rng.uniform();
  }
  s.outcome_rng = RngStream(seed, derive_stream_id({trial, user, kOutcomeStream}));
  return s;
}

EpisodeState EpisodeState::start(std::size_t cells, Dbm m_hat, Dbm c) {
  EpisodeState s;
  s.measured.assign(cells, false);
  s.m_hat = m_hat;
  s.c = c;
  return s;
}

std::string_view to_string(Decision d) noexcept {
  switch (d) {
    case Decision::measure: return "measure";
    case Decision::free_measure: return "free_measure";
    case Decision::handover: return "handover";
  }
  return "unknown";
}

Decision opportunistic_decision(const EpisodeState& state) noexcept {
  if (state.x_best < state.m_hat) {
    return state.y_current > state.x_best ? Decision::measure : Decision::handover;
  }
  if (state.y_current >= state.m_hat + state.c) return Decision::free_measure;
  return Decision::handover;
}

bool classic_handover_due(const EpisodeState& state) noexcept {
  return state.x_best > state.y_current;
}

std::size_t select_next_cell(PolicyKind policy, const LearningState& learning,
                             const std::vector<bool>& measured, const NeighborCellSet& cells,
                             double ucb_alpha, RngStream& rng) {
  const std::size_t k_cells = measured.size();
  std::size_t unmeasured = 0;
  for (bool m : measured) unmeasured += m ? 0 : 1;
  require(unmeasured > 0, "select_next_cell: every cell has been measured");

  switch (policy) {
    case PolicyKind::opportunistic_ts:
    case PolicyKind::classic_ts: {
      std::size_t best = k_cells;
      double best_draw = -1.0;
      for (std::size_t k = 0; k < k_cells; ++k) {
        if (measured[k]) continue;
        const double draw = posterior_sample(learning.posteriors[k], rng);
        if (draw > best_draw) {
          best_draw = draw;
          best = k;
        }
      }
      return best;
    }
    case PolicyKind::classic_ucb: {
      const std::uint64_t total = std::max<std::uint64_t>(learning.total_pulls, 1);
      std::size_t best = k_cells;
      double best_index = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < k_cells; ++k) {
        if (measured[k]) continue;
        const double index = ucb_index(learning.stats[k], total, ucb_alpha);
        if (best == k_cells || index > best_index) {
          best_index = index;
          best = k;
        }
      }
      return best;
    }
    case PolicyKind::baseline: {
      std::size_t pick = rng.below(unmeasured);
      for (std::size_t k = 0; k < k_cells; ++k) {
        if (measured[k]) continue;
        if (pick == 0) return k;
        --pick;
      }
      break;
    }
    case PolicyKind::oracle: {
      require(cells.size() == k_cells, "select_next_cell: cell set size mismatch");
      std::size_t best = k_cells;
      for (std::size_t k = 0; k < k_cells; ++k) {
        if (measured[k]) continue;
        if (best == k_cells ||
            cells.cells[k].true_success_rate > cells.cells[best].true_success_rate) {
          best = k;
        }
      }
      return best;
    }
  }
  throw ContractViolation("select_next_cell: unhandled policy");
}

EpisodeResult run_episode_opportunistic(const UserScenario& scenario, const HandoverEnv& env,
                                        const PolicyParams& params, LearningState& learning,
                                        RngStream& policy_rng) {
  const std::size_t k_cells = env.cells.size();
  const std::size_t budget = effective_budget(params, k_cells);
  auto state = EpisodeState::start(k_cells, params.m_hat, params.c);
  EpisodeResult result;
  for (;;) {
    if (state.n == budget) {
      result.forced = true;
      break;
    }
    const Decision d = opportunistic_decision(state);
    if (d == Decision::handover) break;
    const std::size_t cell = select_next_cell(PolicyKind::opportunistic_ts, learning,
                                              state.measured, env.cells, params.ucb_alpha,
                                              policy_rng);
    measure(cell, d == Decision::free_measure, scenario, env, params, state, learning, result);
  }
  finish(scenario, env, state, result);
  return result;
}

EpisodeResult run_episode_baseline(PolicyKind policy, const UserScenario& scenario,
                                   const HandoverEnv& env, const PolicyParams& params,
                                   LearningState& learning, RngStream& policy_rng) {
  require(policy != PolicyKind::opportunistic_ts,
          "run_episode_baseline does not run the opportunistic policy");
  const std::size_t k_cells = env.cells.size();
  const std::size_t budget = effective_budget(params, k_cells);
  auto state = EpisodeState::start(k_cells, params.m_hat, params.c);
  EpisodeResult result;
  for (;;) {
    const std::size_t cell =
        select_next_cell(policy, learning, state.measured, env.cells, params.ucb_alpha, policy_rng);
    measure(cell, false, scenario, env, params, state, learning, result);
    if (classic_handover_due(state)) break;
    if (state.n == budget) {
      result.forced = true;
      break;
    }
  }
  finish(scenario, env, state, result);
  return result;
}

EpisodeResult run_episode(PolicyKind policy, const UserScenario& scenario, const HandoverEnv& env,
                          const PolicyParams& params, LearningState& learning,
                          RngStream& policy_rng) {
  if (policy == PolicyKind::opportunistic_ts) {
    return run_episode_opportunistic(scenario, env, params, learning, policy_rng);
  }
  return run_episode_baseline(policy, scenario, env, params, learning, policy_rng);
}

EpisodeResult opportunistic_ts_budget1(const UserScenario& scenario, const HandoverEnv& env,
                                       const PolicyParams& params, LearningState& learning,
                                       RngStream& policy_rng) {
  PolicyParams one = params;
  one.measurement_budget = 1;
  return run_episode_opportunistic(scenario, env, one, learning, policy_rng);
}

}  // namespace batt
