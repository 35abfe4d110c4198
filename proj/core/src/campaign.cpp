#include "batt/campaign.hpp"

#include "batt/error.hpp"

namespace batt {
namespace {

constexpr std::uint64_t kPolicyStream = 5;

struct Runner {
  PolicyKind policy;
  LearningState learning;
  RngStream rng;
  CampaignMetrics metrics;
  double cum_regret = 0.0;
};

void record(Runner& r, std::uint64_t user, const EpisodeResult& res, std::uint64_t oracle_cum,
            bool keep_records) {
  auto& m = r.metrics;
  m.successes += res.success ? 1 : 0;
  m.total_measurements += res.n_measurements;
  m.free_measurements += res.free_measurements;
  r.cum_regret = static_cast<double>(oracle_cum) - static_cast<double>(m.successes);
  m.cum_regret_vs_oracle.push_back(r.cum_regret);
  if (keep_records) {
    m.records.push_back({user, res.handover_target, res.n_measurements, res.free_measurements,
                         res.y_at_handover, res.x_at_handover, res.success, m.successes});
  }
}

std::size_t best_rate_cell(const NeighborCellSet& cells) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < cells.size(); ++k) {
    if (cells.cells[k].true_success_rate > cells.cells[best].true_success_rate) best = k;
  }
  return best;
}

}  // namespace

std::vector<CampaignMetrics> run_campaigns(const std::vector<PolicyKind>& policies,
                                           const HandoverEnv& env, const PolicyParams& params,
                                           const CampaignSpec& spec) {
  env.validate();
  params.validate();
  require(spec.users >= 1, "campaign needs at least one user");
  const std::size_t k_cells = env.cells.size();
  const RngStream policy_rng(spec.seed, derive_stream_id({spec.trial, kPolicyStream}));

  std::vector<Runner> runners;
  runners.reserve(policies.size());
  for (auto kind : policies) {
    Runner r{kind, LearningState::fresh(k_cells, params.prior), policy_rng, {}, 0.0};
    r.metrics.policy = kind;
    r.metrics.users = spec.users;
    r.metrics.cum_regret_vs_oracle.reserve(spec.users);
    if (spec.keep_records) r.metrics.records.reserve(spec.users);
    runners.push_back(std::move(r));
  }
  LearningState oracle_learning = LearningState::fresh(k_cells, params.prior);
  RngStream oracle_rng = policy_rng;
  std::uint64_t oracle_successes = 0;

  for (std::uint64_t user = 0; user < spec.users; ++user) {
    const UserScenario scenario = make_scenario(env, params, spec.seed, spec.trial, user);
    const EpisodeResult oracle =
        run_episode(PolicyKind::oracle, scenario, env, params, oracle_learning, oracle_rng);
    oracle_successes += oracle.success ? 1 : 0;
    for (auto& r : runners) {
      if (r.policy == PolicyKind::oracle) {
        // Oracle ignores its learning state and randomness; reuse the pass.
        r.learning.updates += oracle.n_measurements;
        record(r, user, oracle, oracle_successes, spec.keep_records);
        continue;
      }
      const EpisodeResult res = run_episode(r.policy, scenario, env, params, r.learning, r.rng);
      record(r, user, res, oracle_successes, spec.keep_records);
    }
  }

  std::vector<CampaignMetrics> out;
  out.reserve(runners.size());
  for (auto& r : runners) {
    r.metrics.posterior_updates = r.learning.updates;
    r.metrics.success_rate =
        static_cast<double>(r.metrics.successes) / static_cast<double>(spec.users);
    out.push_back(std::move(r.metrics));
  }
  return out;
}

CampaignMetrics run_campaign(PolicyKind policy, const HandoverEnv& env, const PolicyParams& params,
                             const CampaignSpec& spec) {
  return std::move(run_campaigns({policy}, env, params, spec).front());
}

Budget1Metrics run_budget1_campaign(bool use_opportunistic, const HandoverEnv& env,
                                    const PolicyParams& params, const CampaignSpec& spec) {
  env.validate();
  params.validate();
  PolicyParams one = params;
  one.measurement_budget = 1;
  const std::size_t k_cells = env.cells.size();
  const std::size_t best = best_rate_cell(env.cells);
  LearningState learning = LearningState::fresh(k_cells, params.prior);
  RngStream rng(spec.seed, derive_stream_id({spec.trial, kPolicyStream}));

  Budget1Metrics m;
  m.choices.reserve(spec.users);
  m.cum_regret.reserve(spec.users);
  std::uint64_t oracle_successes = 0;
  for (std::uint64_t user = 0; user < spec.users; ++user) {
    const UserScenario scenario = make_scenario(env, one, spec.seed, spec.trial, user);
    const EpisodeResult res =
        use_opportunistic ? opportunistic_ts_budget1(scenario, env, one, learning, rng)
                          : run_episode_baseline(PolicyKind::classic_ts, scenario, env, one,
                                                 learning, rng);
    RngStream outcome = scenario.outcome_rng;
    const bool oracle_ok = draw_handover_outcome(env.serving_curve, env.target_curve,
                                                 scenario.serving_at(0),
                                                 scenario.cell_signal[best], outcome);
    oracle_successes += oracle_ok ? 1 : 0;
    m.successes += res.success ? 1 : 0;
    m.choices.push_back(res.handover_target);
    m.cum_regret.push_back(static_cast<double>(oracle_successes) -
                           static_cast<double>(m.successes));
  }
  return m;
}

}  // namespace batt
