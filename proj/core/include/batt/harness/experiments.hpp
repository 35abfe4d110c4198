#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "batt/campaign.hpp"
#include "batt/harness/config.hpp"
#include "batt/threshold.hpp"

namespace batt::harness {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one value
};
MeanStd mean_std(const std::vector<double>& values);

// ---- threshold experiment ----

struct SearcherSummary {
  std::string name;
  MeanStd violations;
  MeanStd cum_signed_diff;
  MeanStd abs_cum_signed_diff;
  MeanStd coarse_regret;
  MeanStd exploration_rounds;
  // Trial means after each round; rounds are 0-based indices into the series.
  std::vector<double> mean_cum_violations;
  std::vector<double> mean_cum_signed_diff;
};

struct ThresholdTrial {
  std::uint64_t trial = 0;
  ThresholdRunStats bsf;
  ThresholdRunStats uniform;
};

struct ThresholdExperimentResult {
  double epsilon = 0.0;
  std::uint64_t pulls_per_arm = 0;
  std::size_t optimal_arm = 0;
  std::vector<ThresholdTrial> trials;  // per-round logs are dropped after writing
  SearcherSummary bsf;
  SearcherSummary uniform;
};

// Runs both searchers on `run.trials` paired seeds. When `out_dir` is
// non-empty, writes the per-round, per-trial, summary and series CSVs there.
ThresholdExperimentResult run_threshold_experiment(const ExperimentConfig& cfg,
                                                   const std::filesystem::path& out_dir = {});

// ---- handover experiment ----

struct PolicySummary {
  PolicyKind policy = PolicyKind::baseline;
  MeanStd success_rate;
  MeanStd measurements_per_user;
  MeanStd free_per_user;
  MeanStd final_regret;
  std::vector<double> mean_cum_regret;  // length = users
  std::uint64_t total_measurements = 0;
  std::uint64_t total_free = 0;
  std::uint64_t total_updates = 0;
};

struct HandoverExperimentResult {
  std::vector<PolicySummary> policies;  // in kAllPolicies order
  std::vector<std::vector<double>> success_by_trial;  // [policy][trial]

  const PolicySummary& get(PolicyKind kind) const;
};

HandoverExperimentResult run_handover_experiment(const ExperimentConfig& cfg,
                                                 const std::filesystem::path& out_dir = {});

// ---- sweep ----

struct SweepPoint {
  std::vector<std::pair<std::string, std::optional<double>>> settings;
  std::vector<std::pair<std::string, double>> metrics;

  double metric(const std::string& name) const;
};

struct SweepResult {
  ExperimentKind base = ExperimentKind::handover;
  std::vector<SweepPoint> points;
};

// Cartesian product over the configured axes, one summary row per point.
// Throws ConfigError on a missing or empty sweep list.
SweepResult run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir = {});

// Applies one sweep setting to a copy of the config.
ExperimentConfig apply_setting(ExperimentConfig cfg, const std::string& name,
                               std::optional<double> value);

// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware).
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace batt::harness
