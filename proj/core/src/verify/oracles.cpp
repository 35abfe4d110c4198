#include "batt/verify/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "batt/error.hpp"

namespace batt::verify {
namespace {

// Local piecewise-linear interpolation with end clamping; deliberately not
// FailureCurve::eval.
double interpolate(const std::vector<CurveKnot>& knots, double x) {
  if (x <= knots.front().signal) return knots.front().failure_prob;
  if (x >= knots.back().signal) return knots.back().failure_prob;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (x <= knots[i].signal) {
      const auto& a = knots[i - 1];
      const auto& b = knots[i];
      return a.failure_prob + (b.failure_prob - a.failure_prob) * (x - a.signal) / (b.signal - a.signal);
    }
  }
  return knots.back().failure_prob;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string OracleReport::line() const {
  return std::string(agreement ? "AGREE   " : "DISAGREE") + " | " + instance + " | oracle=" +
         oracle_value + " algorithm=" + algorithm_value + " tol=" + fmt(tolerance);
}

OracleReport compare(std::string instance, double oracle, double algorithm, double tolerance) {
  return {std::move(instance), fmt(oracle), fmt(algorithm),
          std::abs(oracle - algorithm) <= tolerance, tolerance};
}

OracleReport compare(std::string instance, std::size_t oracle, std::size_t algorithm) {
  return {std::move(instance), std::to_string(oracle), std::to_string(algorithm),
          oracle == algorithm, 0.0};
}

std::size_t brute_force_threshold(std::span<const double> success_probs, double threshold) {
  for (std::size_t j = 0; j < success_probs.size(); ++j) {
    if (success_probs[j] >= threshold) return j;
  }
  throw ContractViolation("brute_force_threshold: infeasible instance");
}

double exploration_objective(std::size_t arms, std::uint64_t rounds, double delta, double epsilon) {
  const double t = static_cast<double>(rounds);
  const double log_j = std::log(static_cast<double>(arms));
  return epsilon * t +
         3.0 * t * static_cast<double>(arms) *
             std::exp(-2.0 * delta * delta * (epsilon * t / log_j - 1.0));
}

double grid_min_epsilon(std::size_t arms, std::uint64_t rounds, double delta, double resolution) {
  require(resolution > 0.0 && resolution <= 1e-4, "grid_min_epsilon: resolution must be <= 1e-4");
  require(arms >= 2 && rounds >= 1 && delta > 0.0, "grid_min_epsilon: invalid instance");
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / resolution));
  double best_eps = resolution;
  double best_h = exploration_objective(arms, rounds, delta, best_eps);
  for (std::size_t i = 2; i <= steps; ++i) {
    const double eps = std::min(1.0, static_cast<double>(i) * resolution);
    const double h = exploration_objective(arms, rounds, delta, eps);
    if (h < best_h) {
      best_h = h;
      best_eps = eps;
    }
  }
  return best_eps;
}

double expected_success_of_order(const OrderingInstance& instance,
                                 std::span<const std::size_t> order) {
  require(!order.empty() && !instance.serving_trace.empty(), "empty order or trace");
  double x_best = -INFINITY;
  double y = 0.0;
  for (std::size_t n = 0; n < order.size(); ++n) {
    const double x = instance.cell_signal.at(order[n]);
    y = instance.serving_trace[std::min(n, instance.serving_trace.size() - 1)];
    x_best = std::max(x_best, x);
    if (x_best > y) break;
  }
  return (1.0 - interpolate(instance.curve, y)) * (1.0 - interpolate(instance.curve, x_best));
}

BestOrder exhaustive_best_order(const OrderingInstance& instance) {
  const std::size_t k = instance.cell_signal.size();
  require(k >= 1, "exhaustive_best_order needs at least one cell");
  require(k <= 5, "exhaustive_best_order refuses K > 5 (K! enumeration)");
  require(instance.curve.size() >= 2, "exhaustive_best_order needs a curve with two knots");
  BestOrder out;
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  do {
    const double v = expected_success_of_order(instance, order);
    out.all.push_back({order, v});
    if (out.all.size() == 1 || v > out.best.expected_success) out.best = out.all.back();
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

}  // namespace batt::verify
