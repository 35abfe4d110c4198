#include <doctest.h>

#include <cmath>
#include <vector>

#include "batt/analysis.hpp"
#include "batt/error.hpp"
#include "batt/verify/oracles.hpp"

using namespace batt;
using namespace batt::verify;

TEST_CASE("brute force threshold scans linearly") {
  const std::vector<double> probs{0.5, 0.8, 0.96, 0.97, 0.99};
  CHECK(brute_force_threshold(probs, 0.97) == 3);
  CHECK(brute_force_threshold(probs, 0.5) == 0);
  CHECK(brute_force_threshold(probs, 0.961) == 3);
  CHECK_THROWS_AS(brute_force_threshold(probs, 0.995), ContractViolation);
}

TEST_CASE("grid minimum of h near the closed form") {
  const double eps = grid_min_epsilon(81, 25000, 0.05);
  CHECK(eps == doctest::Approx(0.3110).epsilon(1e-3));
  CHECK(std::abs(eps - optimal_epsilon(81, 25000, 0.05)) <= 1e-4);
  CHECK_THROWS_AS(grid_min_epsilon(81, 25000, 0.05, 1e-3), ContractViolation);
  CHECK_THROWS_AS(grid_min_epsilon(1, 25000, 0.05), ContractViolation);
}

TEST_CASE("exploration objective at a hand-checked point") {
  // eps T / ln J - 1 = 0 when eps = ln J / T, leaving eps T + 3 T J.
  const double eps = std::log(4.0) / 1000.0;
  CHECK(exploration_objective(4, 1000, 0.1, eps) == doctest::Approx(std::log(4.0) + 12000.0));
}

TEST_CASE("expected success of an order, computed by hand") {
  // failure(x) = (-90 - x) / 40 on [-130, -90].
  const OrderingInstance inst{{-110.0, -100.0}, {-105.0, -106.0}, {{-130.0, 1.0}, {-90.0, 0.0}}};
  const std::vector<std::size_t> a{0, 1};
  const std::vector<std::size_t> b{1, 0};
  CHECK(expected_success_of_order(inst, a) == doctest::Approx(0.6 * 0.75));
  CHECK(expected_success_of_order(inst, b) == doctest::Approx(0.625 * 0.75));
  const auto best = exhaustive_best_order(inst);
  CHECK(best.all.size() == 2);
  CHECK(best.best.order == b);
}

TEST_CASE("exhaustive enumeration bounds") {
  OrderingInstance inst{{-100, -101, -102, -103, -104}, {-110.0}, {{-130.0, 1.0}, {-90.0, 0.0}}};
  CHECK(exhaustive_best_order(inst).all.size() == 120);
  inst.cell_signal.push_back(-105);
  CHECK_THROWS_AS(exhaustive_best_order(inst), ContractViolation);
}

TEST_CASE("reports carry the agreement flag") {
  CHECK(compare("x", 1.0, 1.00001, 1e-4).agreement);
  CHECK_FALSE(compare("x", 1.0, 1.1, 1e-4).agreement);
  CHECK(compare("i", std::size_t{3}, std::size_t{3}).agreement);
  const auto r = compare("i", std::size_t{3}, std::size_t{4});
  CHECK_FALSE(r.agreement);
  CHECK(r.line().rfind("DISAGREE", 0) == 0);
}
