#include "batt/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "batt/error.hpp"

namespace batt {

FailureCurve::FailureCurve(std::vector<CurveKnot> knots) : knots_(std::move(knots)) {
  require(knots_.size() >= 2, "FailureCurve needs at least two knots");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const auto& k = knots_[i];
    require(std::isfinite(k.signal), "FailureCurve knot signal must be finite");
    require(k.failure_prob >= 0.0 && k.failure_prob <= 1.0,
            "FailureCurve knot " + std::to_string(i) + " has failure probability outside [0,1]");
    if (i > 0) {
      require(k.signal > knots_[i - 1].signal,
              "FailureCurve knot signals must be strictly increasing (knot " + std::to_string(i) +
                  ")");
      require(k.failure_prob <= knots_[i - 1].failure_prob,
              "FailureCurve failure probabilities must be nonincreasing (knot " +
                  std::to_string(i) + ")");
    }
  }
}

double FailureCurve::eval(Dbm signal) const noexcept {
  if (signal <= knots_.front().signal) return knots_.front().failure_prob;
  if (signal >= knots_.back().signal) return knots_.back().failure_prob;
  const auto hi = std::upper_bound(knots_.begin(), knots_.end(), signal,
                                   [](Dbm s, const CurveKnot& k) { return s < k.signal; });
  const auto lo = hi - 1;
  const double t = (signal - lo->signal) / (hi->signal - lo->signal);
  const double value = lo->failure_prob + t * (hi->failure_prob - lo->failure_prob);
  // Rounding can push an interpolated value a hair outside its segment.
  return std::clamp(value, hi->failure_prob, lo->failure_prob);
}

double curve_eval(const FailureCurve& curve, Dbm signal) noexcept { return curve.eval(signal); }

ThresholdGrid::ThresholdGrid(std::vector<Dbm> levels, std::vector<double> success_probs)
    : levels_(std::move(levels)), success_probs_(std::move(success_probs)) {
  require(!levels_.empty(), "ThresholdGrid needs at least one level");
  require(levels_.size() == success_probs_.size(),
          "ThresholdGrid levels and success probabilities differ in length");
  for (std::size_t j = 0; j < levels_.size(); ++j) {
    require(success_probs_[j] >= 0.0 && success_probs_[j] <= 1.0,
            "ThresholdGrid success probability outside [0,1] at arm " + std::to_string(j));
    if (j > 0) {
      require(levels_[j] > levels_[j - 1], "ThresholdGrid levels must be strictly increasing");
      require(success_probs_[j] >= success_probs_[j - 1],
              "ThresholdGrid success probabilities must be nondecreasing");
    }
  }
}

ThresholdGrid ThresholdGrid::from_curve(const FailureCurve& curve, Dbm z_min, Dbm z_max,
                                        std::size_t arms) {
  require(arms >= 1, "grid needs at least one arm");
  require(arms == 1 || z_max > z_min, "grid needs z_max > z_min");
  std::vector<Dbm> levels(arms);
  std::vector<double> probs(arms);
  const double step = arms > 1 ? (z_max - z_min) / static_cast<double>(arms - 1) : 0.0;
  for (std::size_t j = 0; j < arms; ++j) {
    levels[j] = j + 1 == arms && arms > 1 ? z_max : z_min + step * static_cast<double>(j);
    probs[j] = 1.0 - curve.eval(levels[j]);
  }
  // 1 - f(Z) can lose monotonicity only through rounding; restore it.
  for (std::size_t j = 1; j < arms; ++j) probs[j] = std::max(probs[j], probs[j - 1]);
  return ThresholdGrid(std::move(levels), std::move(probs));
}

Dbm ThresholdGrid::level(std::size_t j) const {
  require(j < levels_.size(), "arm index " + std::to_string(j) + " out of range");
  return levels_[j];
}

double ThresholdGrid::success_prob(std::size_t j) const {
  require(j < levels_.size(), "arm index " + std::to_string(j) + " out of range");
  return success_probs_[j];
}

bool pull_threshold_arm(const ThresholdGrid& grid, std::size_t j, RngStream& rng) {
  return rng.bernoulli(grid.success_prob(j));
}

void ServingTraceParams::validate() const {
  require(std::isfinite(y_start), "trace y_start must be finite");
  require(drift_per_step >= 0.0, "trace drift_per_step must be nonnegative");
  require(noise_half_width >= 0.0, "trace noise_half_width must be nonnegative");
  require(c > 0.0, "trace regularity constant c must be positive");
  require(drift_per_step + noise_half_width < c,
          "trace needs drift_per_step + noise_half_width < c");
  require(max_steps >= 1, "trace max_steps must be positive");
}

std::vector<Dbm> gen_serving_trace(const ServingTraceParams& params, RngStream& rng) {
  params.validate();
  std::vector<Dbm> trace;
  trace.reserve(params.max_steps);
  trace.push_back(params.y_start);
  for (std::size_t n = 1; n < params.max_steps; ++n) {
    const double noise = rng.uniform(-params.noise_half_width, params.noise_half_width);
    trace.push_back(trace.back() - params.drift_per_step + noise);
  }
  return trace;
}

void NeighborCellSet::validate() const {
  require(!cells.empty(), "neighbor cell set needs at least one cell");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto& cell = cells[k];
    require(std::isfinite(cell.signal_mean), "cell " + std::to_string(k) + " mean not finite");
    require(cell.signal_half_width >= 0.0,
            "cell " + std::to_string(k) + " half width must be nonnegative");
    require(cell.true_success_rate >= 0.0 && cell.true_success_rate <= 1.0,
            "cell " + std::to_string(k) + " success rate outside [0,1]");
  }
}

Dbm sample_neighbor_signal(const NeighborCellSet& cells, std::size_t k, RngStream& rng) {
  require(k < cells.size(), "cell index " + std::to_string(k) + " out of range");
  const auto& cell = cells.cells[k];
  return rng.uniform(cell.signal_mean - cell.signal_half_width,
                     cell.signal_mean + cell.signal_half_width);
}

bool draw_handover_outcome(const FailureCurve& serving_curve, const FailureCurve& target_curve,
                           Dbm y_at_handover, Dbm x_best, RngStream& rng) {
  const bool serving_ok = rng.uniform() < 1.0 - serving_curve.eval(y_at_handover);
  const bool target_ok = rng.uniform() < 1.0 - target_curve.eval(x_best);
  return serving_ok && target_ok;
}

}  // namespace batt
