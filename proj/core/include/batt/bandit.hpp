#pragma once

#include <cstdint>
#include <optional>

#include "batt/rng.hpp"

namespace batt {

/// Beta belief over a Bernoulli arm's success rate.
struct BetaPosterior {
  double alpha = 1.0;
  double beta = 1.0;

  friend bool operator==(const BetaPosterior&, const BetaPosterior&) = default;
};

// Throws ContractViolation unless alpha > 0 and beta > 0.
BetaPosterior make_posterior(double alpha, double beta);

// Conjugate update: a success bumps alpha, a failure bumps beta.
BetaPosterior posterior_update(BetaPosterior post, bool reward) noexcept;

// One draw from Beta(alpha, beta). Consumes exactly one value from `rng`
// regardless of how many rejection steps the gamma samplers need.
double posterior_sample(const BetaPosterior& post, RngStream& rng);

// Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
double sample_gamma(double shape, RngStream& rng);

// Standard normal via the polar method.
double sample_standard_normal(RngStream& rng);

/// Pull and success counters for frequentist indices.
struct ArmStats {
  std::uint64_t pull_count = 0;
  std::uint64_t success_count = 0;

  void record(bool reward) noexcept {
    ++pull_count;
    if (reward) ++success_count;
  }
  std::optional<double> empirical_mean() const noexcept {
    if (pull_count == 0) return std::nullopt;
    return static_cast<double>(success_count) / static_cast<double>(pull_count);
  }

  friend bool operator==(const ArmStats&, const ArmStats&) = default;
};

// UCB1-style index: mean + sqrt(alpha_ucb * ln(total_pulls) / pull_count),
// +inf for an unpulled arm. Requires total_pulls >= max(1, pull_count).
double ucb_index(const ArmStats& stats, std::uint64_t total_pulls, double alpha_ucb);

}  // namespace batt
