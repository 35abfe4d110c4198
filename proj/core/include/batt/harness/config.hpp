#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "batt/bandit.hpp"
#include "batt/env.hpp"
#include "batt/policies.hpp"
#include "batt/threshold.hpp"

namespace batt::harness {

enum class ExperimentKind { threshold, handover, sweep };
std::string_view to_string(ExperimentKind kind) noexcept;
ExperimentKind parse_experiment(std::string_view name);

struct GridSpec {
  std::size_t arms = 81;
  Dbm z_min = -140.0;
  Dbm z_max = -60.0;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct EnvConfig {
  std::vector<CurveKnot> curve;          // target-side g, also the threshold grid's curve
  std::vector<CurveKnot> serving_curve;  // serving-side f; empty means `curve`
  GridSpec grid;
  NeighborCellSet cells;
  ServingTraceParams trace;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

struct AlgoConfig {
  // Stored as a failure tolerance; the success threshold is R = 1 - tolerance.
  double failure_tolerance = 0.03;
  std::optional<double> epsilon;  // nullopt means "auto"
  std::optional<double> delta;    // gap estimate for "auto"; derived from the grid if absent
  Dbm m_hat = -120.0;
  Dbm c = 4.0;
  std::optional<Dbm> trigger;
  double ucb_alpha = 2.0;
  BetaPosterior prior{};
  RewardRule reward_rule = RewardRule::threshold_indicator;
  std::size_t measurement_budget = 0;

  double success_threshold() const noexcept { return 1.0 - failure_tolerance; }

  friend bool operator==(const AlgoConfig&, const AlgoConfig&) = default;
};

struct RunConfig {
  std::uint64_t rounds = 25000;  // T: rounds (threshold) or users (handover)
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::size_t series_stride = 100;
  bool per_record_csv = true;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// One sweep axis. A missing value stands for "auto" and is only accepted on
// the epsilon axis.
struct SweepAxis {
  std::string name;  // c | R | failure_tolerance | epsilon | K
  std::vector<std::optional<double>> values;

  friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

struct SweepConfig {
  ExperimentKind base = ExperimentKind::handover;
  std::vector<SweepAxis> axes;

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::threshold;
  EnvConfig env;
  AlgoConfig algo;
  RunConfig run;
  std::optional<SweepConfig> sweep;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Parsing and validation throw ConfigError naming the offending field.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

FailureCurve make_curve(const ExperimentConfig& cfg);
ThresholdGrid make_grid(const ExperimentConfig& cfg);
HandoverEnv make_handover_env(const ExperimentConfig& cfg);
PolicyParams make_policy_params(const ExperimentConfig& cfg);

// Resolves "auto" epsilon from the configured delta, or from the grid's
// true gaps when no delta is given.
double resolve_epsilon(const ExperimentConfig& cfg, const ThresholdGrid& grid);
SearchConfig make_search_config(const ExperimentConfig& cfg, const ThresholdGrid& grid);

}  // namespace batt::harness
