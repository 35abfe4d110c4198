#include "verify_suite.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "batt/analysis.hpp"
#include "batt/policies.hpp"
#include "batt/threshold.hpp"
#include "batt/verify/oracles.hpp"

namespace batt::tools {
namespace {

int emit(std::ostream& out, const verify::OracleReport& r) {
  out << r.line() << '\n';
  return r.agreement ? 0 : 1;
}

int check_thresholds(std::ostream& out, RngStream& rng) {
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t arms = 2 + rng.below(30);
    std::vector<double> probs(arms);
    for (auto& p : probs) p = rng.uniform();
    std::sort(probs.begin(), probs.end());
    std::vector<Dbm> levels(arms);
    for (std::size_t j = 0; j < arms; ++j) levels[j] = -140.0 + static_cast<double>(j);
    const double threshold = rng.uniform(0.0, probs.back());
    const ThresholdGrid grid(levels, probs);
    std::ostringstream name;
    name << "threshold J=" << arms << " R=" << threshold;
    bad += emit(out, verify::compare(name.str(), verify::brute_force_threshold(probs, threshold),
                                     true_optimal_arm(grid, threshold)));

    const SearchConfig cfg{arms, 64 * arms, threshold, 0.5, RewardModel::noiseless};
    RngStream search_rng = rng.child(static_cast<std::uint64_t>(i));
    const auto stats = eps_binary_search_first(cfg, grid, search_rng);
    bad += emit(out, verify::compare(name.str() + " noiseless-search",
                                     verify::brute_force_threshold(probs, threshold),
                                     stats.selected_arm));
  }
  return bad;
}

int check_epsilon(std::ostream& out, RngStream& rng) {
  int bad = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t arms = 4 + rng.below(509);
    const auto rounds = static_cast<std::uint64_t>(std::pow(10.0, rng.uniform(3.0, 6.0)));
    const double delta = rng.uniform(0.01, 0.3);
    std::ostringstream name;
    name << "epsilon J=" << arms << " T=" << rounds << " delta=" << delta;
    bad += emit(out, verify::compare(name.str(), verify::grid_min_epsilon(arms, rounds, delta),
                                     optimal_epsilon(arms, rounds, delta), 1e-4));
  }
  return bad;
}

int check_orders(std::ostream& out, RngStream& rng) {
  int bad = 0;
  const std::vector<CurveKnot> knots{{-130.0, 0.5}, {-120.0, 0.1}, {-110.0, 0.02}, {-95.0, 0.0}};
  const FailureCurve curve(knots);
  for (int i = 0; i < 20; ++i) {
    HandoverEnv env{curve, curve, {}, {}};
    env.trace = {rng.uniform(-112.0, -104.0), rng.uniform(0.5, 3.0), 0.0, 4.0, 8};
    for (int k = 0; k < 4; ++k) {
      const Dbm x = rng.uniform(-130.0, -100.0);
      env.cells.cells.push_back({x, 0.0, 1.0 - curve.eval(x)});
    }
    PolicyParams params;
    params.trigger = env.trace.y_start + 1.0;
    const auto scenario = make_scenario(env, params, rng.next_u64(), 0, 0);

    verify::OrderingInstance inst;
    inst.cell_signal = scenario.cell_signal;
    for (std::size_t n = 0; n < 4; ++n) inst.serving_trace.push_back(scenario.serving_at(n));
    inst.curve = knots;
    const auto best = verify::exhaustive_best_order(inst);

    auto learning = LearningState::fresh(4, params.prior);
    RngStream policy_rng(0, 0);
    const auto res = run_episode(PolicyKind::oracle, scenario, env, params, learning, policy_rng);
    std::vector<std::size_t> order;
    for (const auto& s : res.steps) order.push_back(s.cell);
    for (std::size_t k = 0; k < 4; ++k) {
      if (std::find(order.begin(), order.end(), k) == order.end()) order.push_back(k);
    }
    std::ostringstream name;
    name << "oracle-order instance " << i;
    bad += emit(out, verify::compare(name.str(), best.best.expected_success,
                                     verify::expected_success_of_order(inst, order), 1e-12));
  }
  return bad;
}

}  // namespace

int run_verify_suite(std::ostream& out, std::uint64_t seed) {
  RngStream rng(seed, derive_stream_id({0x766572696679}));
  int bad = 0;
  bad += check_thresholds(out, rng);
  bad += check_epsilon(out, rng);
  bad += check_orders(out, rng);
  out << (bad == 0 ? "verify: all references agree\n" : "verify: disagreements found\n");
  return bad;
}

}  // namespace batt::tools
