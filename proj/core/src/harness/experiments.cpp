#include "batt/harness/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "batt/error.hpp"

namespace batt::harness {
namespace {

constexpr std::uint64_t kThresholdStream = 0x7468726573686F6C;  // "threshol"
constexpr int kCsvVersion = 1;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, std::string_view kind, std::string_view columns)
      : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# batt " << kind << " v" << kCsvVersion << "\n" << columns << "\n";
  }
  std::ofstream& row() { return out_; }

 private:
  std::ofstream out_;
};

void prepare_dir(const std::filesystem::path& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

MeanStd summarize(const std::vector<double>& v) { return mean_std(v); }

template <class Get>
MeanStd over(const std::vector<ThresholdTrial>& trials, Get get) {
  std::vector<double> v;
  v.reserve(trials.size());
  for (const auto& t : trials) v.push_back(get(t));
  return summarize(v);
}

// Per-round cumulative violation and signed-difference series of one run.
void cumulative_series(const ThresholdRunStats& s, const ThresholdGrid& grid, double threshold,
                       std::vector<double>& violations, std::vector<double>& signed_diff) {
  violations.resize(s.rounds.size());
  signed_diff.resize(s.rounds.size());
  const Dbm z_m = grid.level(s.optimal_arm);
  double v = 0.0;
  double d = 0.0;
  for (std::size_t i = 0; i < s.rounds.size(); ++i) {
    const auto& r = s.rounds[i];
    if (grid.success_prob(r.arm) < threshold) v += 1.0;
    d += r.z - z_m;
    violations[i] = v;
    signed_diff[i] = d;
  }
}

SearcherSummary searcher_summary(std::string name, const std::vector<ThresholdTrial>& trials,
                                 const ThresholdRunStats ThresholdTrial::*member,
                                 std::vector<std::vector<double>>& viol_series,
                                 std::vector<std::vector<double>>& diff_series) {
  SearcherSummary s;
  s.name = std::move(name);
  s.violations = over(trials, [&](const ThresholdTrial& t) { return double((t.*member).violations); });
  s.cum_signed_diff = over(trials, [&](const ThresholdTrial& t) { return (t.*member).cum_signed_diff; });
  s.abs_cum_signed_diff =
      over(trials, [&](const ThresholdTrial& t) { return std::abs((t.*member).cum_signed_diff); });
  s.coarse_regret = over(trials, [&](const ThresholdTrial& t) { return double((t.*member).coarse_regret); });
  s.exploration_rounds =
      over(trials, [&](const ThresholdTrial& t) { return double((t.*member).exploration_rounds); });
  const std::size_t rounds = viol_series.empty() ? 0 : viol_series.front().size();
  s.mean_cum_violations.assign(rounds, 0.0);
  s.mean_cum_signed_diff.assign(rounds, 0.0);
  for (std::size_t t = 0; t < viol_series.size(); ++t) {
    for (std::size_t i = 0; i < rounds; ++i) {
      s.mean_cum_violations[i] += viol_series[t][i];
      s.mean_cum_signed_diff[i] += diff_series[t][i];
    }
  }
  const double n = static_cast<double>(viol_series.size());
  for (std::size_t i = 0; i < rounds; ++i) {
    s.mean_cum_violations[i] /= n;
    s.mean_cum_signed_diff[i] /= n;
  }
  return s;
}

void write_rounds(const std::filesystem::path& path, std::string_view searcher,
                  const std::vector<ThresholdTrial>& trials,
                  const ThresholdRunStats ThresholdTrial::*member) {
  CsvFile csv(path, std::string("threshold-rounds ") + std::string(searcher),
              "trial,round,arm,Z_dBm,outcome,phase");
  auto& out = csv.row();
  for (const auto& t : trials) {
    for (const auto& r : (t.*member).rounds) {
      out << t.trial << ',' << r.round + 1 << ',' << r.arm + 1 << ',' << fmt(r.z) << ','
          << fmt(r.reward) << ',' << to_string(r.phase) << '\n';
    }
  }
}

void write_metric_columns(std::ostream& out, const MeanStd& m) {
  out << ',' << fmt(m.mean) << ',' << fmt(m.stddev);
}

}  // namespace

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd r;
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ThresholdExperimentResult run_threshold_experiment(const ExperimentConfig& cfg,
                                                   const std::filesystem::path& out_dir) {
  validate(cfg);
  const auto grid = make_grid(cfg);
  const auto search = make_search_config(cfg, grid);
  if (search.rounds * search.epsilon / static_cast<double>(search.arms) < 1.0) {
    throw ConfigError("algo.epsilon", "uniform search needs eps*T/J >= 1");
  }

  ThresholdExperimentResult result;
  result.epsilon = search.epsilon;
  result.pulls_per_arm = search.pulls_per_arm();
  result.optimal_arm = true_optimal_arm(grid, search.threshold);
  result.trials.resize(cfg.run.trials);

  parallel_for(cfg.run.trials, cfg.run.threads, [&](std::size_t i) {
    const RngStream rng(cfg.run.seed, derive_stream_id({kThresholdStream, i}));
    RngStream a = rng;
    RngStream b = rng;
    result.trials[i].trial = i;
    result.trials[i].bsf = eps_binary_search_first(search, grid, a, true);
    result.trials[i].uniform = uniform_search_first(search, grid, b, true);
  });

  std::vector<std::vector<double>> bv(cfg.run.trials), bd(cfg.run.trials);
  std::vector<std::vector<double>> uv(cfg.run.trials), ud(cfg.run.trials);
  for (std::size_t i = 0; i < cfg.run.trials; ++i) {
    cumulative_series(result.trials[i].bsf, grid, search.threshold, bv[i], bd[i]);
    cumulative_series(result.trials[i].uniform, grid, search.threshold, uv[i], ud[i]);
  }
  result.bsf = searcher_summary("eps_binary_search_first", result.trials, &ThresholdTrial::bsf, bv, bd);
  result.uniform = searcher_summary("uniform_search_first", result.trials, &ThresholdTrial::uniform, uv, ud);

  if (!out_dir.empty()) {
    prepare_dir(out_dir);
    if (cfg.run.per_record_csv) {
      write_rounds(out_dir / "threshold_rounds_bsf.csv", "bsf", result.trials, &ThresholdTrial::bsf);
      write_rounds(out_dir / "threshold_rounds_uniform.csv", "uniform", result.trials,
                   &ThresholdTrial::uniform);
    }
    {
      CsvFile csv(out_dir / "threshold_trials.csv", "threshold-trials",
                  "trial,seed,searcher,violations,cum_signed_diff,coarse_regret,exploration_rounds,"
                  "selected_arm,optimal_arm");
      for (const auto& t : result.trials) {
        for (const auto* s : {&t.bsf, &t.uniform}) {
          csv.row() << t.trial << ',' << cfg.run.seed << ','
                    << (s == &t.bsf ? result.bsf.name : result.uniform.name) << ',' << s->violations
                    << ',' << fmt(s->cum_signed_diff) << ',' << s->coarse_regret << ','
                    << s->exploration_rounds << ',' << s->selected_arm + 1 << ','
                    << s->optimal_arm + 1 << '\n';
        }
      }
    }
    {
      CsvFile csv(out_dir / "threshold_summary.csv", "threshold-summary",
                  "searcher,epsilon,pulls_per_arm,violations_mean,violations_std,cum_signed_diff_mean,"
                  "cum_signed_diff_std,abs_cum_signed_diff_mean,abs_cum_signed_diff_std,"
                  "coarse_regret_mean,coarse_regret_std,exploration_rounds_mean,exploration_rounds_std");
      for (const auto* s : {&result.bsf, &result.uniform}) {
        auto& out = csv.row();
        out << s->name << ',' << fmt(result.epsilon) << ',' << result.pulls_per_arm;
        write_metric_columns(out, s->violations);
        write_metric_columns(out, s->cum_signed_diff);
        write_metric_columns(out, s->abs_cum_signed_diff);
        write_metric_columns(out, s->coarse_regret);
        write_metric_columns(out, s->exploration_rounds);
        out << '\n';
      }
    }
    {
      CsvFile csv(out_dir / "threshold_series.csv", "threshold-series",
                  "round,bsf_cum_violations,uniform_cum_violations,bsf_cum_signed_diff,"
                  "uniform_cum_signed_diff");
      const std::size_t n = result.bsf.mean_cum_violations.size();
      for (std::size_t i = 0; i < n; ++i) {
        if ((i + 1) % cfg.run.series_stride != 0 && i + 1 != n) continue;
        csv.row() << i + 1 << ',' << fmt(result.bsf.mean_cum_violations[i]) << ','
                  << fmt(result.uniform.mean_cum_violations[i]) << ','
                  << fmt(result.bsf.mean_cum_signed_diff[i]) << ','
                  << fmt(result.uniform.mean_cum_signed_diff[i]) << '\n';
      }
    }
  }
  for (auto& t : result.trials) {
    t.bsf.rounds.clear();
    t.bsf.rounds.shrink_to_fit();
    t.uniform.rounds.clear();
    t.uniform.rounds.shrink_to_fit();
  }
  return result;
}

const PolicySummary& HandoverExperimentResult::get(PolicyKind kind) const {
  for (const auto& p : policies) {
    if (p.policy == kind) return p;
  }
  throw ContractViolation("policy missing from result");
}

HandoverExperimentResult run_handover_experiment(const ExperimentConfig& cfg,
                                                 const std::filesystem::path& out_dir) {
  validate(cfg);
  const auto env = make_handover_env(cfg);
  const auto params = make_policy_params(cfg);
  const std::vector<PolicyKind> kinds(std::begin(kAllPolicies), std::end(kAllPolicies));
  const std::size_t trials = cfg.run.trials;
  const bool write = !out_dir.empty();
  const bool per_user = write && cfg.run.per_record_csv;
  if (write) prepare_dir(out_dir);

  // [trial][policy]; per-user records are written and dropped inside the worker.
  std::vector<std::vector<CampaignMetrics>> runs(trials);
  parallel_for(trials, cfg.run.threads, [&](std::size_t t) {
    CampaignSpec spec{cfg.run.rounds, cfg.run.seed, t, per_user};
    auto metrics = run_campaigns(kinds, env, params, spec);
    if (per_user) {
      CsvFile csv(out_dir / ("handover_users_trial" + std::to_string(t) + ".csv"), "handover-users",
                  "trial,user,policy,n_meas,free_meas,y_ho,x_ho,success,cum_success");
      auto& out = csv.row();
      for (auto& m : metrics) {
        for (const auto& r : m.records) {
          out << t << ',' << r.user + 1 << ',' << to_string(m.policy) << ',' << r.n_measurements << ','
              << r.free_measurements << ',' << fmt(r.y_at_handover) << ',' << fmt(r.x_at_handover)
              << ',' << (r.success ? 1 : 0) << ',' << r.cum_successes << '\n';
        }
        m.records.clear();
        m.records.shrink_to_fit();
      }
    }
    runs[t] = std::move(metrics);
  });

  HandoverExperimentResult result;
  result.success_by_trial.assign(kinds.size(), {});
  const double users = static_cast<double>(cfg.run.rounds);
  for (std::size_t p = 0; p < kinds.size(); ++p) {
    PolicySummary s;
    s.policy = kinds[p];
    std::vector<double> rate, meas, free, regret;
    s.mean_cum_regret.assign(cfg.run.rounds, 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& m = runs[t][p];
      rate.push_back(m.success_rate);
      meas.push_back(static_cast<double>(m.total_measurements) / users);
      free.push_back(static_cast<double>(m.free_measurements) / users);
      regret.push_back(m.cum_regret_vs_oracle.back());
      s.total_measurements += m.total_measurements;
      s.total_free += m.free_measurements;
      s.total_updates += m.posterior_updates;
      for (std::size_t u = 0; u < m.cum_regret_vs_oracle.size(); ++u) {
        s.mean_cum_regret[u] += m.cum_regret_vs_oracle[u];
      }
    }
    for (auto& v : s.mean_cum_regret) v /= static_cast<double>(trials);
    s.success_rate = mean_std(rate);
    s.measurements_per_user = mean_std(meas);
    s.free_per_user = mean_std(free);
    s.final_regret = mean_std(regret);
    result.success_by_trial[p] = rate;
    result.policies.push_back(std::move(s));
  }

  if (write) {
    {
      CsvFile csv(out_dir / "handover_summary.csv", "handover-summary",
                  "policy,success_rate_mean,success_rate_std,meas_per_user_mean,meas_per_user_std,"
                  "free_per_user_mean,free_per_user_std,final_regret_mean,final_regret_std");
      for (const auto& s : result.policies) {
        auto& out = csv.row();
        out << to_string(s.policy);
        write_metric_columns(out, s.success_rate);
        write_metric_columns(out, s.measurements_per_user);
        write_metric_columns(out, s.free_per_user);
        write_metric_columns(out, s.final_regret);
        out << '\n';
      }
    }
    {
      CsvFile csv(out_dir / "handover_trials.csv", "handover-trials",
                  "trial,seed,policy,success_rate,meas_per_user,free_per_user,final_regret");
      for (std::size_t t = 0; t < trials; ++t) {
        for (const auto& m : runs[t]) {
          csv.row() << t << ',' << cfg.run.seed << ',' << to_string(m.policy) << ','
                    << fmt(m.success_rate) << ',' << fmt(double(m.total_measurements) / users) << ','
                    << fmt(double(m.free_measurements) / users) << ','
                    << fmt(m.cum_regret_vs_oracle.back()) << '\n';
        }
      }
    }
    {
      std::string cols = "user";
      for (auto k : kinds) cols += ",regret_" + std::string(to_string(k));
      CsvFile csv(out_dir / "handover_regret_series.csv", "handover-regret-series", cols);
      const std::size_t n = cfg.run.rounds;
      for (std::size_t u = 0; u < n; ++u) {
        if ((u + 1) % cfg.run.series_stride != 0 && u + 1 != n) continue;
        auto& out = csv.row();
        out << u + 1;
        for (const auto& s : result.policies) out << ',' << fmt(s.mean_cum_regret[u]);
        out << '\n';
      }
    }
  }
  return result;
}

double SweepPoint::metric(const std::string& name) const {
  for (const auto& [key, value] : metrics) {
    if (key == name) return value;
  }
  throw ContractViolation("unknown sweep metric '" + name + "'");
}

ExperimentConfig apply_setting(ExperimentConfig cfg, const std::string& name,
                               std::optional<double> value) {
  if (name == "epsilon") {
    cfg.algo.epsilon = value;
    return cfg;
  }
  if (!value) throw ConfigError("sweep.axes", "\"auto\" only applies to epsilon");
  const double v = *value;
  if (name == "c") {
    cfg.algo.c = v;
  } else if (name == "R") {
    cfg.algo.failure_tolerance = 1.0 - v;
  } else if (name == "failure_tolerance") {
    cfg.algo.failure_tolerance = v;
  } else if (name == "K") {
    if (!(v >= 1.0) || v != std::floor(v) || v > static_cast<double>(cfg.env.cells.size())) {
      throw ConfigError("sweep.axes", "K must be an integer in [1, number of cells]");
    }
    cfg.env.cells.cells.resize(static_cast<std::size_t>(v));
  } else {
    throw ConfigError("sweep.axes", "unknown axis '" + name + "'");
  }
  return cfg;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  if (!cfg.sweep) throw ConfigError("sweep", "missing sweep block");
  if (cfg.sweep->axes.empty()) throw ConfigError("sweep.axes", "sweep list is empty");
  for (const auto& axis : cfg.sweep->axes) {
    if (axis.values.empty()) throw ConfigError("sweep.axes", "sweep list is empty");
  }
  validate(cfg);

  SweepResult result;
  result.base = cfg.sweep->base;
  const auto& axes = cfg.sweep->axes;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    SweepPoint point;
    ExperimentConfig point_cfg = cfg;
    point_cfg.experiment = cfg.sweep->base;
    point_cfg.sweep.reset();
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& value = axes[a].values[idx[a]];
      point.settings.emplace_back(axes[a].name, value);
      point_cfg = apply_setting(std::move(point_cfg), axes[a].name, value);
    }
    auto add = [&](const std::string& name, const MeanStd& m) {
      point.metrics.emplace_back(name + "_mean", m.mean);
      point.metrics.emplace_back(name + "_std", m.stddev);
    };
    if (result.base == ExperimentKind::threshold) {
      const auto r = run_threshold_experiment(point_cfg);
      point.metrics.emplace_back("epsilon", r.epsilon);
      for (const auto* s : {&r.bsf, &r.uniform}) {
        const std::string prefix = s == &r.bsf ? "bsf_" : "uniform_";
        add(prefix + "violations", s->violations);
        add(prefix + "abs_cum_signed_diff", s->abs_cum_signed_diff);
        add(prefix + "coarse_regret", s->coarse_regret);
      }
    } else {
      const auto r = run_handover_experiment(point_cfg);
      for (const auto& s : r.policies) {
        const std::string prefix = std::string(to_string(s.policy)) + "_";
        add(prefix + "success_rate", s.success_rate);
        add(prefix + "meas_per_user", s.measurements_per_user);
        add(prefix + "free_per_user", s.free_per_user);
        add(prefix + "final_regret", s.final_regret);
      }
    }
    result.points.push_back(std::move(point));

    bool done = true;
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++idx[a] < axes[a].values.size()) {
        done = false;
        break;
      }
      idx[a] = 0;
    }
    if (done) break;
  }

  if (!out_dir.empty()) {
    prepare_dir(out_dir);
    std::string cols;
    for (const auto& axis : axes) cols += (cols.empty() ? "" : ",") + axis.name;
    for (const auto& [name, value] : result.points.front().metrics) cols += "," + name;
    CsvFile csv(out_dir / "sweep_summary.csv", "sweep-summary", cols);
    for (const auto& p : result.points) {
      auto& out = csv.row();
      for (std::size_t a = 0; a < p.settings.size(); ++a) {
        if (a) out << ',';
        out << (p.settings[a].second ? fmt(*p.settings[a].second) : std::string("auto"));
      }
      for (const auto& [name, value] : p.metrics) out << ',' << fmt(value);
      out << '\n';
    }
  }
  return result;
}

}  // namespace batt::harness
