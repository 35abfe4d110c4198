#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "batt/error.hpp"
#include "batt/harness/config.hpp"
#include "batt/harness/experiments.hpp"
#include "verify_suite.hpp"

namespace {

using namespace batt;
using namespace batt::harness;

constexpr int kConfigError = 2;
constexpr int kContractViolation = 3;

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

ExperimentConfig load(const RunArgs& args, ExperimentKind expected) {
  auto cfg = load_config(args.config);
  if (cfg.experiment != expected) {
    throw ConfigError("experiment", "config is for '" + std::string(to_string(cfg.experiment)) +
                                        "', not '" + std::string(to_string(expected)) + "'");
  }
  if (args.seed) cfg.run.seed = *args.seed;
  if (args.out) cfg.run.output_dir = *args.out;
  return cfg;
}

void print_threshold(const ThresholdExperimentResult& r) {
  std::printf("epsilon %.6g, P = %llu, optimal arm %zu\n", r.epsilon,
              static_cast<unsigned long long>(r.pulls_per_arm), r.optimal_arm + 1);
  std::printf("%-26s %12s %12s %14s %14s\n", "searcher", "violations", "+-", "|cum diff|", "+-");
  for (const auto* s : {&r.bsf, &r.uniform}) {
    std::printf("%-26s %12.2f %12.2f %14.2f %14.2f\n", s->name.c_str(), s->violations.mean,
                s->violations.stddev, s->abs_cum_signed_diff.mean, s->abs_cum_signed_diff.stddev);
  }
}

void print_handover(const HandoverExperimentResult& r) {
  std::printf("%-18s %10s %8s %10s %10s %12s\n", "policy", "success", "+-", "meas/user", "free/user",
              "regret");
  for (const auto& s : r.policies) {
    std::printf("%-18s %9.3f%% %7.3f%% %10.3f %10.3f %12.1f\n", std::string(to_string(s.policy)).c_str(),
                100.0 * s.success_rate.mean, 100.0 * s.success_rate.stddev,
                s.measurements_per_user.mean, s.free_per_user.mean, s.final_regret.mean);
  }
}

void print_sweep(const SweepResult& r) {
  for (const auto& p : r.points) {
    for (const auto& [name, value] : p.settings) {
      std::printf("%s=%s ", name.c_str(), value ? std::to_string(*value).c_str() : "auto");
    }
    std::printf("\n");
    for (const auto& [name, value] : p.metrics) std::printf("  %-36s %.6g\n", name.c_str(), value);
  }
}

void add_run_options(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--config", args.config, "experiment configuration (JSON)")->required();
  cmd->add_option("--seed", args.seed, "override run.seed");
  cmd->add_option("--out", args.out, "override run.output_dir");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batt: threshold search and handover measurement experiments"};
  app.require_subcommand(1);

  RunArgs threshold_args, handover_args, sweep_args;
  auto* threshold = app.add_subcommand("threshold", "closest-sufficient threshold search experiment");
  add_run_options(threshold, threshold_args);
  auto* handover = app.add_subcommand("handover", "handover policy comparison");
  add_run_options(handover, handover_args);
  auto* sweep = app.add_subcommand("sweep", "cartesian parameter sweep");
  add_run_options(sweep, sweep_args);
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "check the library against brute-force references");
  verify->add_option("--seed", verify_seed, "instance generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*threshold) {
      const auto cfg = load(threshold_args, ExperimentKind::threshold);
      print_threshold(run_threshold_experiment(cfg, cfg.run.output_dir));
    } else if (*handover) {
      const auto cfg = load(handover_args, ExperimentKind::handover);
      print_handover(run_handover_experiment(cfg, cfg.run.output_dir));
    } else if (*sweep) {
      const auto cfg = load(sweep_args, ExperimentKind::sweep);
      print_sweep(run_sweep(cfg, cfg.run.output_dir));
    } else if (*verify) {
      return batt::tools::run_verify_suite(std::cout, verify_seed) == 0 ? 0 : kContractViolation;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return kContractViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
