#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "batt/rng.hpp"

namespace batt {

// Signal strength in dBm. More negative is weaker.
using Dbm = double;

struct CurveKnot {
  Dbm signal = 0.0;
  double failure_prob = 0.0;

  friend bool operator==(const CurveKnot&, const CurveKnot&) = default;
};

/// Monotone map from signal strength to handover-failure probability.
///
/// Piecewise-linear through the knots and clamped to the end values outside
/// them. Knot signals are strictly increasing and failure probabilities are
/// nonincreasing, so the curve is nonincreasing everywhere.
class FailureCurve {
 public:
  // Throws ContractViolation on fewer than two knots, unsorted signals,
  // increasing failure probabilities or probabilities outside [0, 1].
  explicit FailureCurve(std::vector<CurveKnot> knots);

  double eval(Dbm signal) const noexcept;
  const std::vector<CurveKnot>& knots() const noexcept { return knots_; }

  friend bool operator==(const FailureCurve&, const FailureCurve&) = default;

 private:
  std::vector<CurveKnot> knots_;
};

double curve_eval(const FailureCurve& curve, Dbm signal) noexcept;

/// The J-armed threshold instance: serving signal levels and their true
/// handover success probabilities (nondecreasing in signal).
class ThresholdGrid {
 public:
  ThresholdGrid(std::vector<Dbm> levels, std::vector<double> success_probs);

  // J levels evenly spaced on [z_min, z_max] with r_j = 1 - curve(Z_j).
  static ThresholdGrid from_curve(const FailureCurve& curve, Dbm z_min, Dbm z_max,
                                  std::size_t arms);

  std::size_t size() const noexcept { return levels_.size(); }
  std::span<const Dbm> levels() const noexcept { return levels_; }
  std::span<const double> success_probs() const noexcept { return success_probs_; }
  Dbm level(std::size_t j) const;
  double success_prob(std::size_t j) const;

  friend bool operator==(const ThresholdGrid&, const ThresholdGrid&) = default;

 private:
  std::vector<Dbm> levels_;
  std::vector<double> success_probs_;
};

// Bernoulli draw for arm j (0-based); true = handover success.
bool pull_threshold_arm(const ThresholdGrid& grid, std::size_t j, RngStream& rng);

/// Serving-cell signal process: linear drift down plus bounded uniform noise.
struct ServingTraceParams {
  Dbm y_start = -100.0;
  Dbm drift_per_step = 1.0;
  Dbm noise_half_width = 0.0;
  Dbm c = 4.0;
  std::size_t max_steps = 32;

  // drift + noise < c, nonnegative drift/noise, max_steps >= 1.
  void validate() const;

  friend bool operator==(const ServingTraceParams&, const ServingTraceParams&) = default;
};

// Y_0 = y_start, Y_{n+1} = Y_n - drift + U[-noise, noise]; max_steps values.
// Consumes exactly max_steps - 1 draws.
std::vector<Dbm> gen_serving_trace(const ServingTraceParams& params, RngStream& rng);

struct NeighborCell {
  Dbm signal_mean = -110.0;
  Dbm signal_half_width = 0.0;
  double true_success_rate = 1.0;

  friend bool operator==(const NeighborCell&, const NeighborCell&) = default;
};

struct NeighborCellSet {
  std::vector<NeighborCell> cells;

  std::size_t size() const noexcept { return cells.size(); }
  void validate() const;

  friend bool operator==(const NeighborCellSet&, const NeighborCellSet&) = default;
};

// Uniform draw on [mean - half_width, mean + half_width] for cell k (0-based).
Dbm sample_neighbor_signal(const NeighborCellSet& cells, std::size_t k, RngStream& rng);

// Success iff the serving-side and target-side Bernoulli draws both succeed.
// Always consumes two draws, serving side first.
bool draw_handover_outcome(const FailureCurve& serving_curve, const FailureCurve& target_curve,
                           Dbm y_at_handover, Dbm x_best, RngStream& rng);

inline bool draw_handover_outcome(const FailureCurve& curve, Dbm y_at_handover, Dbm x_best,
                                  RngStream& rng) {
  return draw_handover_outcome(curve, curve, y_at_handover, x_best, rng);
}

}  // namespace batt
