#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "batt/policies.hpp"

namespace batt {

struct UserRecord {
  std::uint64_t user = 0;
  std::size_t target = 0;
  std::size_t n_measurements = 0;
  std::size_t free_measurements = 0;
  Dbm y_at_handover = 0.0;
  Dbm x_at_handover = 0.0;
  bool success = false;
  std::uint64_t cum_successes = 0;
};

struct CampaignMetrics {
  PolicyKind policy = PolicyKind::baseline;
  std::uint64_t users = 0;
  std::uint64_t successes = 0;
  double success_rate = 0.0;
  // Oracle cumulative successes minus this policy's, after each user.
  std::vector<double> cum_regret_vs_oracle;
  std::vector<UserRecord> records;
  std::uint64_t total_measurements = 0;
  std::uint64_t free_measurements = 0;
  std::uint64_t posterior_updates = 0;
};

struct CampaignSpec {
  std::uint64_t users = 1;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  bool keep_records = true;
};

// Runs `spec.users` sequential episodes with learning state persisting across
// users. The Oracle runs on the same scenarios to produce the regret series.
CampaignMetrics run_campaign(PolicyKind policy, const HandoverEnv& env, const PolicyParams& params,
                             const CampaignSpec& spec);

// Runs several policies on the same scenarios, sharing one Oracle pass.
std::vector<CampaignMetrics> run_campaigns(const std::vector<PolicyKind>& policies,
                                           const HandoverEnv& env, const PolicyParams& params,
                                           const CampaignSpec& spec);

/// Single-measurement campaign: every user gets exactly one cell.
struct Budget1Metrics {
  std::vector<std::size_t> choices;
  std::vector<double> cum_regret;  // vs. always picking the highest-rate cell
  std::uint64_t successes = 0;
};

// `use_opportunistic` selects opportunistic_ts_budget1; otherwise classic TS
// with a budget of one. Both consume the policy stream identically.
Budget1Metrics run_budget1_campaign(bool use_opportunistic, const HandoverEnv& env,
                                    const PolicyParams& params, const CampaignSpec& spec);

}  // namespace batt
