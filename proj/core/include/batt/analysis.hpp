#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "batt/env.hpp"

namespace batt {

/// Gap parameters of a closest-sufficient-arm instance.
struct TheoremParams {
  std::size_t optimal_arm = 0;
  double gap_to_threshold = 0.0;  // Delta = r_M - R
  double min_arm_gap = 0.0;       // D = min_{j != M} |r_M - r_j|
  double min_threshold_gap = 0.0; // d = min_j |r_j - R|
  double delta = 0.0;             // min(Delta, D / 2)
};

// d is taken over every arm of the grid.
TheoremParams theorem_params(const ThresholdGrid& grid, double threshold);
// d is taken over the listed (searched) arms only.
TheoremParams theorem_params(const ThresholdGrid& grid, double threshold,
                             std::span<const std::size_t> searched);

// Closed-form minimiser of the exploration/misselection trade-off
//   eps = lnJ/T - lnJ/(2 T delta^2) * ln(lnJ / (6 delta^2 T J)),
// clamped to [kMinEpsilon, 1]. Natural logarithms throughout.
inline constexpr double kMinEpsilon = 1e-9;
double optimal_epsilon(std::size_t arms, std::uint64_t rounds, double delta);

// Coarse-regret bound
//   lnJ * (ln(6 delta^2 T J)/(2 delta^2) - ln lnJ/(2 delta^2) + 1/(2 delta^2) + 1).
// Requires J >= 2, T >= 1, delta > 0 and 6 delta^2 T J > 1.
double regret_bound(std::size_t arms, std::uint64_t rounds, double delta);

// d < sqrt(ln(T lnJ) / (2 P)), the side condition under which the bound is
// stated.
bool bound_condition_holds(double min_threshold_gap, std::size_t arms, std::uint64_t rounds,
                           std::uint64_t pulls_per_arm);

}  // namespace batt
