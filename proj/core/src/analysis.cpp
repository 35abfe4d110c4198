#include "batt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "batt/error.hpp"
#include "batt/threshold.hpp"

namespace batt {
namespace {

TheoremParams gaps_except_d(const ThresholdGrid& grid, double threshold) {
  TheoremParams p;
  const auto probs = grid.success_probs();
  p.optimal_arm = true_optimal_arm(grid, threshold);
  const double r_m = probs[p.optimal_arm];
  p.gap_to_threshold = r_m - threshold;
  p.min_arm_gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (j != p.optimal_arm) p.min_arm_gap = std::min(p.min_arm_gap, std::abs(r_m - probs[j]));
  }
  // A single-arm grid has no competitor; only Delta constrains delta then.
  p.delta = std::min(p.gap_to_threshold, p.min_arm_gap / 2.0);
  return p;
}

}  // namespace

TheoremParams theorem_params(const ThresholdGrid& grid, double threshold) {
  auto p = gaps_except_d(grid, threshold);
  p.min_threshold_gap = std::numeric_limits<double>::infinity();
  for (double r : grid.success_probs()) {
    p.min_threshold_gap = std::min(p.min_threshold_gap, std::abs(r - threshold));
  }
  return p;
}

TheoremParams theorem_params(const ThresholdGrid& grid, double threshold,
                             std::span<const std::size_t> searched) {
  auto p = gaps_except_d(grid, threshold);
  p.min_threshold_gap = std::numeric_limits<double>::infinity();
  for (std::size_t j : searched) {
    p.min_threshold_gap = std::min(p.min_threshold_gap, std::abs(grid.success_prob(j) - threshold));
  }
  return p;
}

double optimal_epsilon(std::size_t arms, std::uint64_t rounds, double delta) {
  require(arms >= 2, "optimal_epsilon needs J >= 2");
  require(rounds >= 1, "optimal_epsilon needs T >= 1");
  require(delta > 0.0 && std::isfinite(delta), "optimal_epsilon needs delta > 0");
  const double log_j = std::log(static_cast<double>(arms));
  const double t = static_cast<double>(rounds);
  const double d2 = delta * delta;
  const double inner = log_j / (6.0 * d2 * t * static_cast<double>(arms));
  const double eps = log_j / t - log_j / (2.0 * t * d2) * std::log(inner);
  return std::clamp(eps, kMinEpsilon, 1.0);
}

double regret_bound(std::size_t arms, std::uint64_t rounds, double delta) {
  require(arms >= 2, "regret_bound needs J >= 2");
  require(rounds >= 1, "regret_bound needs T >= 1");
  require(delta > 0.0 && std::isfinite(delta), "regret_bound needs delta > 0");
  const double j = static_cast<double>(arms);
  const double t = static_cast<double>(rounds);
  const double d2 = delta * delta;
  require(6.0 * d2 * t * j > 1.0, "regret_bound needs 6 delta^2 T J > 1");
  const double log_j = std::log(j);
  return log_j * (std::log(6.0 * d2 * t * j) / (2.0 * d2) - std::log(log_j) / (2.0 * d2) +
                  1.0 / (2.0 * d2) + 1.0);
}

bool bound_condition_holds(double min_threshold_gap, std::size_t arms, std::uint64_t rounds,
                           std::uint64_t pulls_per_arm) {
  require(arms >= 2 && rounds >= 1 && pulls_per_arm >= 1,
          "bound_condition_holds needs J >= 2, T >= 1, P >= 1");
  const double log_j = std::log(static_cast<double>(arms));
  const double limit =
      std::sqrt(std::log(static_cast<double>(rounds) * log_j) / (2.0 * static_cast<double>(pulls_per_arm)));
  return min_threshold_gap < limit;
}

}  // namespace batt
