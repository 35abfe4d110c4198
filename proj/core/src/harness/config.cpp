#include "batt/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "batt/analysis.hpp"
#include "batt/error.hpp"

namespace batt::harness {
namespace {

using nlohmann::json;

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(join(where, key), "unknown key");
  }
}

const json& need(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(join(where, key), "missing");
  return obj.at(key);
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(field, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

const json& need_object(const json& obj, const std::string& key, const std::string& where) {
  const json& v = need(obj, key, where);
  if (!v.is_object()) throw ConfigError(join(where, key), "expected an object");
  return v;
}

std::vector<CurveKnot> parse_knots(const json& arr, const std::string& field) {
  if (!arr.is_array()) throw ConfigError(field, "expected an array of knots");
  std::vector<CurveKnot> knots;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = field + "[" + std::to_string(i) + "]";
    reject_unknown(arr[i], where, {"signal", "failure"});
    knots.push_back({get_number(need(arr[i], "signal", where), where + ".signal"),
                     get_number(need(arr[i], "failure", where), where + ".failure")});
  }
  return knots;
}

EnvConfig parse_env(const json& j) {
  EnvConfig env;
  reject_unknown(j, "env", {"curve", "serving_curve", "grid", "cells", "trace"});
  env.curve = parse_knots(need(j, "curve", "env"), "env.curve");
  if (j.contains("serving_curve")) env.serving_curve = parse_knots(j.at("serving_curve"), "env.serving_curve");

  const json& grid = need_object(j, "grid", "env");
  reject_unknown(grid, "env.grid", {"J", "z_min", "z_max"});
  env.grid.arms = get_count(need(grid, "J", "env.grid"), "env.grid.J");
  env.grid.z_min = get_number(need(grid, "z_min", "env.grid"), "env.grid.z_min");
  env.grid.z_max = get_number(need(grid, "z_max", "env.grid"), "env.grid.z_max");

  const json& cells = need(j, "cells", "env");
  if (!cells.is_array()) throw ConfigError("env.cells", "expected an array of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string where = "env.cells[" + std::to_string(i) + "]";
    reject_unknown(cells[i], where, {"mean", "half_width", "success_rate"});
    env.cells.cells.push_back(
        {get_number(need(cells[i], "mean", where), where + ".mean"),
         get_number(need(cells[i], "half_width", where), where + ".half_width"),
         get_number(need(cells[i], "success_rate", where), where + ".success_rate")});
  }

  const json& trace = need_object(j, "trace", "env");
  reject_unknown(trace, "env.trace", {"y_start", "drift_per_step", "noise_half_width", "c", "max_steps"});
  env.trace.y_start = get_number(need(trace, "y_start", "env.trace"), "env.trace.y_start");
  env.trace.drift_per_step =
      get_number(need(trace, "drift_per_step", "env.trace"), "env.trace.drift_per_step");
  env.trace.noise_half_width =
      get_number(need(trace, "noise_half_width", "env.trace"), "env.trace.noise_half_width");
  env.trace.c = get_number(need(trace, "c", "env.trace"), "env.trace.c");
  env.trace.max_steps = get_count(need(trace, "max_steps", "env.trace"), "env.trace.max_steps");
  return env;
}

AlgoConfig parse_algo(const json& j) {
  AlgoConfig a;
  reject_unknown(j, "algo", {"failure_tolerance", "R", "epsilon", "delta", "m_hat", "c", "trigger",
                             "ucb_alpha", "prior", "reward_rule", "measurement_budget"});
  if (j.contains("failure_tolerance") && j.contains("R")) {
    throw ConfigError("algo.R", "give either R or failure_tolerance, not both");
  }
  if (j.contains("R")) {
    a.failure_tolerance = 1.0 - get_number(j.at("R"), "algo.R");
  } else {
    a.failure_tolerance = get_number(need(j, "failure_tolerance", "algo"), "algo.failure_tolerance");
  }
  if (j.contains("epsilon")) {
    const json& e = j.at("epsilon");
    if (e.is_string()) {
      if (e.get<std::string>() != "auto") throw ConfigError("algo.epsilon", "expected a number or \"auto\"");
      a.epsilon.reset();
    } else {
      a.epsilon = get_number(e, "algo.epsilon");
    }
  } else {
    a.epsilon.reset();
  }
  if (j.contains("delta")) a.delta = get_number(j.at("delta"), "algo.delta");
  if (j.contains("m_hat")) a.m_hat = get_number(j.at("m_hat"), "algo.m_hat");
  if (j.contains("c")) a.c = get_number(j.at("c"), "algo.c");
  if (j.contains("trigger")) a.trigger = get_number(j.at("trigger"), "algo.trigger");
  if (j.contains("ucb_alpha")) a.ucb_alpha = get_number(j.at("ucb_alpha"), "algo.ucb_alpha");
  if (j.contains("prior")) {
    const json& p = j.at("prior");
    reject_unknown(p, "algo.prior", {"alpha", "beta"});
    a.prior.alpha = get_number(need(p, "alpha", "algo.prior"), "algo.prior.alpha");
    a.prior.beta = get_number(need(p, "beta", "algo.prior"), "algo.prior.beta");
  }
  if (j.contains("reward_rule")) {
    const json& r = j.at("reward_rule");
    if (!r.is_string()) throw ConfigError("algo.reward_rule", "expected a string");
    try {
      a.reward_rule = parse_reward_rule(r.get<std::string>());
    } catch (const ContractViolation& e) {
      throw ConfigError("algo.reward_rule", e.what());
    }
  }
  if (j.contains("measurement_budget")) {
    a.measurement_budget = get_count(j.at("measurement_budget"), "algo.measurement_budget");
  }
  return a;
}

RunConfig parse_run(const json& j) {
  RunConfig r;
  reject_unknown(j, "run", {"T", "trials", "seed", "output_dir", "threads", "series_stride",
                            "per_record_csv"});
  r.rounds = get_count(need(j, "T", "run"), "run.T");
  if (j.contains("trials")) r.trials = get_count(j.at("trials"), "run.trials");
  if (j.contains("seed")) r.seed = get_count(j.at("seed"), "run.seed");
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw ConfigError("run.output_dir", "expected a string");
    r.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("threads")) r.threads = get_count(j.at("threads"), "run.threads");
  if (j.contains("series_stride")) r.series_stride = get_count(j.at("series_stride"), "run.series_stride");
  if (j.contains("per_record_csv")) {
    if (!j.at("per_record_csv").is_boolean()) throw ConfigError("run.per_record_csv", "expected true/false");
    r.per_record_csv = j.at("per_record_csv").get<bool>();
  }
  return r;
}

SweepConfig parse_sweep(const json& j) {
  SweepConfig s;
  reject_unknown(j, "sweep", {"base", "axes"});
  const json& base = need(j, "base", "sweep");
  if (!base.is_string()) throw ConfigError("sweep.base", "expected a string");
  s.base = parse_experiment(base.get<std::string>());
  if (s.base == ExperimentKind::sweep) throw ConfigError("sweep.base", "a sweep cannot sweep a sweep");
  const json& axes = need(j, "axes", "sweep");
  if (!axes.is_array()) throw ConfigError("sweep.axes", "expected an array");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const std::string where = "sweep.axes[" + std::to_string(i) + "]";
    reject_unknown(axes[i], where, {"name", "values"});
    SweepAxis axis;
    const json& name = need(axes[i], "name", where);
    if (!name.is_string()) throw ConfigError(where + ".name", "expected a string");
    axis.name = name.get<std::string>();
    const json& values = need(axes[i], "values", where);
    if (!values.is_array()) throw ConfigError(where + ".values", "expected an array");
    for (std::size_t v = 0; v < values.size(); ++v) {
      const std::string vf = where + ".values[" + std::to_string(v) + "]";
      if (values[v].is_string() && values[v].get<std::string>() == "auto") {
        axis.values.push_back(std::nullopt);
      } else {
        axis.values.push_back(get_number(values[v], vf));
      }
    }
    s.axes.push_back(std::move(axis));
  }
  return s;
}

json knots_to_json(const std::vector<CurveKnot>& knots) {
  json arr = json::array();
  for (const auto& k : knots) arr.push_back({{"signal", k.signal}, {"failure", k.failure_prob}});
  return arr;
}

// Runs `fn`, turning a ContractViolation into a ConfigError on `field`.
template <class Fn>
auto as_config_error(const std::string& field, Fn&& fn) {
  try {
    return fn();
  } catch (const ContractViolation& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::threshold: return "threshold";
    case ExperimentKind::handover: return "handover";
    case ExperimentKind::sweep: return "sweep";
  }
  return "unknown";
}

ExperimentKind parse_experiment(std::string_view name) {
  if (name == "threshold") return ExperimentKind::threshold;
  if (name == "handover") return ExperimentKind::handover;
  if (name == "sweep") return ExperimentKind::sweep;
  throw ConfigError("experiment", "unknown experiment '" + std::string(name) + "'");
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<file>", "top level must be an object");
  reject_unknown(j, "", {"experiment", "env", "algo", "run", "sweep"});

  ExperimentConfig cfg;
  const json& exp = need(j, "experiment", "");
  if (!exp.is_string()) throw ConfigError("experiment", "expected a string");
  cfg.experiment = parse_experiment(exp.get<std::string>());
  cfg.env = parse_env(need_object(j, "env", ""));
  cfg.algo = parse_algo(need_object(j, "algo", ""));
  cfg.run = parse_run(need_object(j, "run", ""));
  if (j.contains("sweep")) cfg.sweep = parse_sweep(j.at("sweep"));
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string dump_config(const ExperimentConfig& cfg) {
  json env;
  env["curve"] = knots_to_json(cfg.env.curve);
  if (!cfg.env.serving_curve.empty()) env["serving_curve"] = knots_to_json(cfg.env.serving_curve);
  env["grid"] = {{"J", cfg.env.grid.arms}, {"z_min", cfg.env.grid.z_min}, {"z_max", cfg.env.grid.z_max}};
  json cells = json::array();
  for (const auto& c : cfg.env.cells.cells) {
    cells.push_back({{"mean", c.signal_mean}, {"half_width", c.signal_half_width},
                     {"success_rate", c.true_success_rate}});
  }
  env["cells"] = cells;
  const auto& t = cfg.env.trace;
  env["trace"] = {{"y_start", t.y_start}, {"drift_per_step", t.drift_per_step},
                  {"noise_half_width", t.noise_half_width}, {"c", t.c}, {"max_steps", t.max_steps}};

  const auto& a = cfg.algo;
  json algo = {{"failure_tolerance", a.failure_tolerance},
               {"m_hat", a.m_hat},
               {"c", a.c},
               {"ucb_alpha", a.ucb_alpha},
               {"prior", {{"alpha", a.prior.alpha}, {"beta", a.prior.beta}}},
               {"reward_rule", std::string(to_string(a.reward_rule))},
               {"measurement_budget", a.measurement_budget}};
  if (a.epsilon) {
    algo["epsilon"] = *a.epsilon;
  } else {
    algo["epsilon"] = "auto";
  }
  if (a.delta) algo["delta"] = *a.delta;
  if (a.trigger) algo["trigger"] = *a.trigger;

  const auto& r = cfg.run;
  json run = {{"T", r.rounds},          {"trials", r.trials},
              {"seed", r.seed},         {"output_dir", r.output_dir},
              {"threads", r.threads},   {"series_stride", r.series_stride},
              {"per_record_csv", r.per_record_csv}};

  json out = {{"experiment", std::string(to_string(cfg.experiment))},
              {"env", env},
              {"algo", algo},
              {"run", run}};
  if (cfg.sweep) {
    json axes = json::array();
    for (const auto& axis : cfg.sweep->axes) {
      json values = json::array();
      for (const auto& v : axis.values) {
        if (v) {
          values.push_back(*v);
        } else {
          values.push_back("auto");
        }
      }
      axes.push_back({{"name", axis.name}, {"values", values}});
    }
    out["sweep"] = {{"base", std::string(to_string(cfg.sweep->base))}, {"axes", axes}};
  }
  return out.dump(2) + "\n";
}

void validate(const ExperimentConfig& cfg) {
  as_config_error("env.curve", [&] { return FailureCurve(cfg.env.curve); });
  if (!cfg.env.serving_curve.empty()) {
    as_config_error("env.serving_curve", [&] { return FailureCurve(cfg.env.serving_curve); });
  }
  if (cfg.env.grid.arms < 1) throw ConfigError("env.grid.J", "must be at least 1");
  if (cfg.env.grid.arms > 1 && !(cfg.env.grid.z_max > cfg.env.grid.z_min)) {
    throw ConfigError("env.grid.z_max", "must exceed z_min");
  }
  as_config_error("env.cells", [&] { cfg.env.cells.validate(); return 0; });
  as_config_error("env.trace", [&] { cfg.env.trace.validate(); return 0; });

  const auto& a = cfg.algo;
  if (!(a.failure_tolerance >= 0.0 && a.failure_tolerance <= 1.0)) {
    throw ConfigError("algo.failure_tolerance", "must lie in [0,1]");
  }
  if (a.epsilon && !(*a.epsilon > 0.0 && *a.epsilon <= 1.0)) {
    throw ConfigError("algo.epsilon", "must lie in (0,1] or be \"auto\"");
  }
  if (a.delta && !(*a.delta > 0.0)) throw ConfigError("algo.delta", "must be positive");
  if (!(a.c >= 0.0)) throw ConfigError("algo.c", "must be nonnegative");
  if (!(a.ucb_alpha > 0.0)) throw ConfigError("algo.ucb_alpha", "must be positive");
  if (!(a.prior.alpha > 0.0)) throw ConfigError("algo.prior.alpha", "must be positive");
  if (!(a.prior.beta > 0.0)) throw ConfigError("algo.prior.beta", "must be positive");

  const auto& r = cfg.run;
  if (r.rounds < 1) throw ConfigError("run.T", "must be at least 1");
  if (r.trials < 1) throw ConfigError("run.trials", "must be at least 1");
  if (r.series_stride < 1) throw ConfigError("run.series_stride", "must be at least 1");

  const bool needs_threshold =
      cfg.experiment == ExperimentKind::threshold ||
      (cfg.experiment == ExperimentKind::sweep && cfg.sweep && cfg.sweep->base == ExperimentKind::threshold);
  if (needs_threshold) {
    const auto grid = make_grid(cfg);
    try {
      true_optimal_arm(grid, a.success_threshold());
    } catch (const NoSufficientArm&) {
      throw ConfigError("algo.failure_tolerance", "no grid level reaches the success threshold");
    }
  }
  if (cfg.experiment == ExperimentKind::sweep) {
    if (!cfg.sweep) throw ConfigError("sweep", "missing for experiment \"sweep\"");
    if (cfg.sweep->axes.empty()) throw ConfigError("sweep.axes", "sweep list is empty");
    for (std::size_t i = 0; i < cfg.sweep->axes.size(); ++i) {
      const auto& axis = cfg.sweep->axes[i];
      const std::string where = "sweep.axes[" + std::to_string(i) + "]";
      static const std::set<std::string> names{"c", "R", "failure_tolerance", "epsilon", "K"};
      if (!names.contains(axis.name)) throw ConfigError(where + ".name", "unknown axis '" + axis.name + "'");
      if (axis.values.empty()) throw ConfigError(where + ".values", "sweep list is empty");
      for (const auto& v : axis.values) {
        if (!v && axis.name != "epsilon") throw ConfigError(where + ".values", "\"auto\" only applies to epsilon");
      }
    }
  }
}

FailureCurve make_curve(const ExperimentConfig& cfg) {
  return as_config_error("env.curve", [&] { return FailureCurve(cfg.env.curve); });
}

ThresholdGrid make_grid(const ExperimentConfig& cfg) {
  return as_config_error("env.grid", [&] {
    return ThresholdGrid::from_curve(FailureCurve(cfg.env.curve), cfg.env.grid.z_min,
                                     cfg.env.grid.z_max, cfg.env.grid.arms);
  });
}

HandoverEnv make_handover_env(const ExperimentConfig& cfg) {
  const auto target = make_curve(cfg);
  if (cfg.env.serving_curve.empty()) return HandoverEnv{target, target, cfg.env.cells, cfg.env.trace};
  const auto serving =
      as_config_error("env.serving_curve", [&] { return FailureCurve(cfg.env.serving_curve); });
  return HandoverEnv{serving, target, cfg.env.cells, cfg.env.trace};
}

PolicyParams make_policy_params(const ExperimentConfig& cfg) {
  PolicyParams p;
  p.m_hat = cfg.algo.m_hat;
  p.c = cfg.algo.c;
  p.trigger = cfg.algo.trigger;
  p.ucb_alpha = cfg.algo.ucb_alpha;
  p.prior = cfg.algo.prior;
  p.reward_rule = cfg.algo.reward_rule;
  p.measurement_budget = cfg.algo.measurement_budget;
  return p;
}

double resolve_epsilon(const ExperimentConfig& cfg, const ThresholdGrid& grid) {
  if (cfg.algo.epsilon) return *cfg.algo.epsilon;
  if (grid.size() < 2) throw ConfigError("algo.epsilon", "\"auto\" needs at least two arms");
  double delta = 0.0;
  if (cfg.algo.delta) {
    delta = *cfg.algo.delta;
  } else {
    delta = theorem_params(grid, cfg.algo.success_threshold()).delta;
    if (!(delta > 0.0)) {
      throw ConfigError("algo.epsilon", "\"auto\" derived a non-positive delta from the grid; set algo.delta");
    }
  }
  return optimal_epsilon(grid.size(), cfg.run.rounds, delta);
}

SearchConfig make_search_config(const ExperimentConfig& cfg, const ThresholdGrid& grid) {
  SearchConfig s;
  s.arms = grid.size();
  s.rounds = cfg.run.rounds;
  s.threshold = cfg.algo.success_threshold();
  s.epsilon = resolve_epsilon(cfg, grid);
  as_config_error("algo.epsilon", [&] { s.validate(); return 0; });
  return s;
}

}  // namespace batt::harness
