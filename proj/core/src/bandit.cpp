#include "batt/bandit.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "batt/error.hpp"

namespace batt {

BetaPosterior make_posterior(double alpha, double beta) {
  require(alpha > 0.0 && beta > 0.0 && std::isfinite(alpha) && std::isfinite(beta),
          "Beta posterior needs alpha > 0 and beta > 0, got (" + std::to_string(alpha) + ", " +
              std::to_string(beta) + ")");
  return {alpha, beta};
}

BetaPosterior posterior_update(BetaPosterior post, bool reward) noexcept {
  if (reward) {
    post.alpha += 1.0;
  } else {
    post.beta += 1.0;
  }
  return post;
}

double sample_standard_normal(RngStream& rng) {
  for (;;) {
    const double u = 2.0 * rng.uniform() - 1.0;
    const double v = 2.0 * rng.uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double sample_gamma(double shape, RngStream& rng) {
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    const double g = sample_gamma(shape + 1.0, rng);
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = sample_standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double posterior_sample(const BetaPosterior& post, RngStream& rng) {
  // The rejection samplers run on a private stream keyed by one draw, so the
  // caller's stream always advances by exactly one position.
  RngStream local(rng.next_u64(), 0x6265746153616D70ull);
  const double x = sample_gamma(post.alpha, local);
  const double y = sample_gamma(post.beta, local);
  const double total = x + y;
  if (!(total > 0.0)) return post.alpha >= post.beta ? 1.0 : 0.0;
  return x / total;
}

double ucb_index(const ArmStats& stats, std::uint64_t total_pulls, double alpha_ucb) {
  require(total_pulls >= 1 && total_pulls >= stats.pull_count,
          "ucb_index: total_pulls must be >= max(1, pull_count)");
  require(alpha_ucb > 0.0, "ucb_index: alpha_ucb must be positive");
  if (stats.pull_count == 0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(stats.pull_count);
  const double mean = static_cast<double>(stats.success_count) / n;
  return mean + std::sqrt(alpha_ucb * std::log(static_cast<double>(total_pulls)) / n);
}

}  // namespace batt
