#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "batt/error.hpp"
#include "batt/harness/config.hpp"
#include "batt/harness/experiments.hpp"

using namespace batt;
using namespace batt::harness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json base_json(const std::string& experiment) {
  json cells = json::array();
  const double rates[] = {0.76, 0.88, 0.90, 0.93, 0.97};
  for (int k = 0; k < 5; ++k) {
    cells.push_back({{"mean", -124.0 + 3.0 * k}, {"half_width", 3.0}, {"success_rate", rates[k]}});
  }
  return {{"experiment", experiment},
          {"env",
           {{"curve", json::array({{{"signal", -140}, {"failure", 0.9}},
                                   {{"signal", -125}, {"failure", 0.2}},
                                   {{"signal", -115}, {"failure", 0.03}},
                                   {{"signal", -100}, {"failure", 0.0}}})},
            {"grid", {{"J", 16}, {"z_min", -140}, {"z_max", -80}}},
            {"cells", cells},
            {"trace",
             {{"y_start", -100}, {"drift_per_step", 1.5}, {"noise_half_width", 1.0}, {"c", 4}, {"max_steps", 40}}}}},
          {"algo", {{"failure_tolerance", 0.05}, {"epsilon", 0.3}}},
          {"run", {{"T", 1500}, {"trials", 3}, {"seed", 9}, {"threads", 2}, {"series_stride", 50}}}};
}

ExperimentConfig parse(const json& j) { return parse_config(j.dump()); }

std::string config_error_field(const json& j) {
  try {
    parse(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t data_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++n;
  }
  return n - 1;  // column line
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("batt_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config errors name the offending field") {
  auto j = base_json("threshold");
  j["run"].erase("T");
  CHECK(config_error_field(j) == "run.T");

  j = base_json("threshold");
  j["algo"]["foo"] = 1;
  CHECK(config_error_field(j) == "algo.foo");

  j = base_json("threshold");
  j["algo"]["R"] = 0.97;
  CHECK(config_error_field(j) == "algo.R");

  j = base_json("threshold");
  j["env"]["trace"]["c"] = 2.0;
  CHECK(config_error_field(j) == "env.trace");

  j = base_json("threshold");
  j["env"]["grid"]["J"] = 0;
  CHECK(config_error_field(j) == "env.grid.J");

  j = base_json("threshold");
  j["env"].erase("curve");
  CHECK(config_error_field(j) == "env.curve");

  j = base_json("threshold");
  j["env"]["curve"][1]["failure"] = 0.95;
  CHECK(config_error_field(j) == "env.curve");

  j = base_json("threshold");
  j["algo"]["epsilon"] = "sometimes";
  CHECK(config_error_field(j) == "algo.epsilon");

  j = base_json("threshold");
  j["algo"]["failure_tolerance"] = 0.0;
  j["env"]["curve"].back()["failure"] = 0.01;
  CHECK(config_error_field(j) == "algo.failure_tolerance");

  j = base_json("handover");
  j["algo"]["reward_rule"] = "vibes";
  CHECK(config_error_field(j) == "algo.reward_rule");

  j = base_json("treshold");
  CHECK(config_error_field(j) == "experiment");

  CHECK_THROWS_AS(parse_config("{"), ConfigError);
}

TEST_CASE("R and failure tolerance are interchangeable") {
  auto j = base_json("threshold");
  j["algo"].erase("failure_tolerance");
  j["algo"]["R"] = 0.95;
  const auto cfg = parse(j);
  CHECK(cfg.algo.failure_tolerance == doctest::Approx(0.05));
  CHECK(cfg.algo.success_threshold() == doctest::Approx(0.95));
}

TEST_CASE("dump and parse round trip") {
  auto j = base_json("sweep");
  j["algo"]["epsilon"] = "auto";
  j["algo"]["delta"] = 0.02;
  j["algo"]["trigger"] = -110.0;
  j["env"]["serving_curve"] = json::array({{{"signal", -130}, {"failure", 0.5}}, {{"signal", -110}, {"failure", 0.0}}});
  j["sweep"] = {{"base", "threshold"},
                {"axes", json::array({{{"name", "epsilon"}, {"values", json::array({0.1, "auto"})}},
                                      {{"name", "c"}, {"values", json::array({2, 4})}}})}};
  const auto cfg = parse(j);
  const auto again = parse_config(dump_config(cfg));
  CHECK(again == cfg);
  CHECK(dump_config(again) == dump_config(cfg));
  CHECK_FALSE(again.algo.epsilon.has_value());
  REQUIRE(again.sweep.has_value());
  CHECK_FALSE(again.sweep->axes[0].values[1].has_value());

  const auto plain = parse(base_json("handover"));
  CHECK(parse_config(dump_config(plain)) == plain);
}

TEST_CASE("auto epsilon resolves through the closed form") {
  auto j = base_json("threshold");
  j["algo"]["epsilon"] = "auto";
  j["algo"]["delta"] = 0.05;
  j["env"]["grid"]["J"] = 81;
  j["run"]["T"] = 25000;
  const auto cfg = parse(j);
  CHECK(resolve_epsilon(cfg, make_grid(cfg)) == doctest::Approx(0.3109875).epsilon(1e-5));
}

TEST_CASE("threshold experiment writes one row per round and reruns byte-identically") {
  const auto cfg = parse(base_json("threshold"));
  const auto a = fresh_dir("thr_a");
  const auto b = fresh_dir("thr_b");
  const auto ra = run_threshold_experiment(cfg, a);
  auto cfg1 = cfg;
  cfg1.run.threads = 1;
  run_threshold_experiment(cfg1, b);

  CHECK(data_rows(a / "threshold_rounds_bsf.csv") == 1500 * 3);
  CHECK(data_rows(a / "threshold_rounds_uniform.csv") == 1500 * 3);
  CHECK(data_rows(a / "threshold_trials.csv") == 3 * 2);
  CHECK(data_rows(a / "threshold_series.csv") == 1500 / 50);
  const std::string rounds = slurp(a / "threshold_rounds_bsf.csv");
  CHECK(rounds.rfind("# batt threshold-rounds", 0) == 0);
  CHECK(rounds.find("\ntrial,round,arm,Z_dBm,outcome,phase\n") != std::string::npos);

  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    CHECK_MESSAGE(slurp(entry.path()) == slurp(b / name), name.string());
  }
  for (const auto& t : ra.trials) {
    std::uint64_t sum = 0;
    for (auto p : t.bsf.pulls) sum += p;
    CHECK(sum == 1500);
    CHECK(t.bsf.rounds.empty());
  }
}

TEST_CASE("noiseless all-sufficient grid has no violations") {
  auto j = base_json("threshold");
  j["env"]["curve"] = json::array({{{"signal", -140}, {"failure", 0.0}}, {{"signal", -80}, {"failure", 0.0}}});
  j["run"]["trials"] = 1;
  const auto r = run_threshold_experiment(parse(j));
  CHECK(r.optimal_arm == 0);
  CHECK(r.bsf.violations.mean == 0.0);
  CHECK(r.uniform.violations.mean == 0.0);
}

TEST_CASE("uniform search rejects too small a budget") {
  auto j = base_json("threshold");
  j["algo"]["epsilon"] = 0.001;
  CHECK_THROWS_AS(run_threshold_experiment(parse(j)), ConfigError);
}

TEST_CASE("handover experiment files and oracle row") {
  auto j = base_json("handover");
  j["run"]["T"] = 800;
  const auto cfg = parse(j);
  const auto dir = fresh_dir("ho");
  const auto r = run_handover_experiment(cfg, dir);
  CHECK(r.policies.size() == 5);
  for (double v : r.get(PolicyKind::oracle).mean_cum_regret) REQUIRE(v == 0.0);
  CHECK(r.get(PolicyKind::oracle).final_regret.mean == 0.0);
  for (const auto& p : r.policies) CHECK(p.total_updates == p.total_measurements);
  for (int t = 0; t < 3; ++t) {
    const auto file = dir / ("handover_users_trial" + std::to_string(t) + ".csv");
    CHECK(data_rows(file) == 800 * 5);
    const std::string text = slurp(file);
    CHECK(text.find("\ntrial,user,policy,n_meas,free_meas,y_ho,x_ho,success,cum_success\n") !=
          std::string::npos);
  }
  const std::string summary = slurp(dir / "handover_summary.csv");
  CHECK(summary.find("success_rate_mean,success_rate_std") != std::string::npos);

  const auto again = fresh_dir("ho_again");
  run_handover_experiment(cfg, again);
  for (const auto& entry : fs::directory_iterator(dir)) {
    CHECK(slurp(entry.path()) == slurp(again / entry.path().filename()));
  }
}

TEST_CASE("sweeps") {
  auto j = base_json("sweep");
  j["run"]["T"] = 1500;
  j["sweep"] = {{"base", "handover"}, {"axes", json::array({{{"name", "c"}, {"values", json::array({0, 4, 8})}}})}};
  const auto sweep = run_sweep(parse(j));
  REQUIRE(sweep.points.size() == 3);
  const std::string free = "opportunistic_ts_free_per_user_mean";
  CHECK(sweep.points[0].metric(free) <= sweep.points[1].metric(free));
  CHECK(sweep.points[1].metric(free) <= sweep.points[2].metric(free));

  SUBCASE("a single-point sweep equals the single experiment") {
    j["sweep"]["axes"][0]["values"] = json::array({4});
    const auto one = run_sweep(parse(j));
    auto single = parse(j);
    single.experiment = ExperimentKind::handover;
    single.sweep.reset();
    const auto direct = run_handover_experiment(single);
    REQUIRE(one.points.size() == 1);
    for (const auto& p : direct.policies) {
      CHECK(one.points[0].metric(std::string(to_string(p.policy)) + "_success_rate_mean") ==
            p.success_rate.mean);
    }
  }

  SUBCASE("Cartesian product size") {
    j["sweep"]["axes"].push_back({{"name", "K"}, {"values", json::array({2, 5})}});
    j["run"]["T"] = 200;
    const auto grid = run_sweep(parse(j));
    CHECK(grid.points.size() == 6);
    CHECK(grid.points[1].settings[1].second == 5.0);
  }

  SUBCASE("empty or malformed sweep lists are config errors") {
    j["sweep"]["axes"][0]["values"] = json::array();
    CHECK(config_error_field(j) == "sweep.axes[0].values");
    j["sweep"]["axes"] = json::array();
    CHECK(config_error_field(j) == "sweep.axes");
    j["sweep"]["axes"] = json::array({{{"name", "c"}, {"values", json::array({"auto"})}}});
    CHECK(config_error_field(j) == "sweep.axes[0].values");
    j["sweep"]["axes"] = json::array({{{"name", "K"}, {"values", json::array({9})}}});
    CHECK_THROWS_AS(run_sweep(parse(j)), ConfigError);
  }
}

TEST_CASE("threshold sweep over epsilon") {
  auto j = base_json("sweep");
  j["sweep"] = {{"base", "threshold"},
                {"axes", json::array({{{"name", "epsilon"}, {"values", json::array({0.2, "auto"})}}})}};
  j["algo"]["delta"] = 0.05;
  const auto sweep = run_sweep(parse(j));
  REQUIRE(sweep.points.size() == 2);
  CHECK(sweep.points[0].metric("epsilon") == 0.2);
  auto cfg = parse(j);
  cfg.algo.epsilon.reset();
  CHECK(sweep.points[1].metric("epsilon") == resolve_epsilon(cfg, make_grid(cfg)));
}

TEST_CASE("shipped configs") {
  const fs::path dir = BATT_CONFIG_DIR;
  for (const char* name : {"threshold.json", "handover.json", "sweep_c.json", "sweep_epsilon.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(dir / name));
  }

  SUBCASE("handover cells sit on the target curve") {
    const auto cfg = load_config(dir / "handover.json");
    const auto curve = make_curve(cfg);
    REQUIRE(cfg.env.cells.size() == 9);
    for (const auto& cell : cfg.env.cells.cells) {
      CHECK(1.0 - curve.eval(cell.signal_mean) == doctest::Approx(cell.true_success_rate).epsilon(1e-9));
    }
    CHECK(cfg.env.trace.drift_per_step + cfg.env.trace.noise_half_width < cfg.env.trace.c);
  }

  SUBCASE("free observations grow with c") {
    auto cfg = load_config(dir / "sweep_c.json");
    cfg.run.rounds = 5000;
    cfg.run.trials = 2;
    const auto sweep = run_sweep(cfg);
    REQUIRE(sweep.points.size() == 3);
    const std::string free = "opportunistic_ts_free_per_user_mean";
    CHECK(sweep.points[0].metric(free) == 0.0);
    CHECK(sweep.points[0].metric(free) < sweep.points[1].metric(free));
    CHECK(sweep.points[1].metric(free) < sweep.points[2].metric(free));
  }
}

TEST_CASE("parallel_for covers every index and propagates errors") {
  std::vector<int> hit(100, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) REQUIRE(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw ContractViolation("x"); }),
                  ContractViolation);
}

#ifdef BATT_CLI
TEST_CASE("CLI exit codes") {
  const auto dir = fresh_dir("cli");
  auto write = [&](const std::string& name, const json& j) {
    std::ofstream(dir / name) << j.dump();
    return (dir / name).string();
  };
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(BATT_CLI) + " " + args + " > " + (dir / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  auto ok = base_json("threshold");
  ok["run"]["T"] = 300;
  const auto good = write("good.json", ok);
  CHECK(run("threshold --config " + good + " --out " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "threshold_summary.csv"));
  CHECK(run("threshold --config " + good + " --seed 4 --out " + (dir / "out4").string()) == 0);
  CHECK(slurp(dir / "out" / "threshold_trials.csv") != slurp(dir / "out4" / "threshold_trials.csv"));

  auto bad = ok;
  bad["run"]["T"] = -1;
  CHECK(run("threshold --config " + write("bad.json", bad)) == 2);
  CHECK(run("handover --config " + good) == 2);
  CHECK(run("threshold --config " + (dir / "missing.json").string()) == 2);
  CHECK(run("threshold") == 2);

  auto contract = ok;
  contract["algo"]["epsilon"] = 0.02;
  contract["run"]["T"] = 20;
  CHECK(run("threshold --config " + write("tiny.json", contract) + " --out " + (dir / "o2").string()) == 2);
  CHECK(run("verify") == 0);
}
#endif
