#include <doctest.h>

#include <cmath>

#include "batt/env.hpp"
#include "batt/error.hpp"

using namespace batt;

namespace {
const FailureCurve kTwoKnot({{-140.0, 0.60}, {-120.0, 0.10}});
}

TEST_CASE("curve_eval examples") {
  CHECK(curve_eval(kTwoKnot, -130.0) == doctest::Approx(0.35));
  CHECK(curve_eval(kTwoKnot, -120.0) == doctest::Approx(0.10));
  CHECK(curve_eval(kTwoKnot, -50.0) == doctest::Approx(0.10));
  CHECK(curve_eval(kTwoKnot, -200.0) == doctest::Approx(0.60));
}

TEST_CASE("curve validation") {
  CHECK_THROWS_AS(FailureCurve({{-120.0, 0.1}}), ContractViolation);
  CHECK_THROWS_AS(FailureCurve({{-120.0, 0.1}, {-130.0, 0.2}}), ContractViolation);
  CHECK_THROWS_AS(FailureCurve({{-130.0, 0.1}, {-120.0, 0.2}}), ContractViolation);
  CHECK_THROWS_AS(FailureCurve({{-130.0, 1.5}, {-120.0, 0.2}}), ContractViolation);
  CHECK_THROWS_AS(FailureCurve({{-130.0, 0.5}, {-130.0, 0.2}}), ContractViolation);
}

TEST_CASE("curves are nonincreasing everywhere") {
  RngStream rng(1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CurveKnot> knots;
    double s = -150.0, f = 1.0;
    const int n = 2 + static_cast<int>(rng.below(6));
    for (int i = 0; i < n; ++i) {
      s += rng.uniform(0.5, 10.0);
      f -= rng.uniform(0.0, f);
      knots.push_back({s, f});
    }
    const FailureCurve curve(knots);
    double prev = 2.0;
    for (double x = -160.0; x < -40.0; x += 0.37) {
      const double v = curve.eval(x);
      REQUIRE(v <= prev);
      REQUIRE(v >= 0.0);
      prev = v;
    }
  }
}

TEST_CASE("grid from a curve is monotone and uses r = 1 - f") {
  const FailureCurve curve({{-140, 0.9}, {-120, 0.05}, {-100, 0.0}});
  const auto grid = ThresholdGrid::from_curve(curve, -140.0, -60.0, 81);
  REQUIRE(grid.size() == 81);
  CHECK(grid.level(0) == -140.0);
  CHECK(grid.level(80) == -60.0);
  CHECK(grid.level(40) == -100.0);
  CHECK(grid.success_prob(20) == doctest::Approx(0.95));
  for (std::size_t j = 1; j < grid.size(); ++j) {
    CHECK(grid.level(j) > grid.level(j - 1));
    CHECK(grid.success_prob(j) >= grid.success_prob(j - 1));
  }
  CHECK_THROWS_AS(grid.level(81), ContractViolation);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(ThresholdGrid({}, {}), ContractViolation);
  CHECK_THROWS_AS(ThresholdGrid({-1.0, -2.0}, {0.1, 0.2}), ContractViolation);
  CHECK_THROWS_AS(ThresholdGrid({-2.0, -1.0}, {0.3, 0.2}), ContractViolation);
  CHECK_THROWS_AS(ThresholdGrid({-2.0, -1.0}, {0.3}), ContractViolation);
  CHECK_NOTHROW(ThresholdGrid({-2.0}, {0.3}));
}

TEST_CASE("pull_threshold_arm examples") {
  const ThresholdGrid grid({-3, -2, -1}, {0.0, 0.9, 1.0});
  RngStream rng(2, 2);
  int sum = 0;
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(pull_threshold_arm(grid, 2, rng));
    REQUIRE_FALSE(pull_threshold_arm(grid, 0, rng));
  }
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += pull_threshold_arm(grid, 1, rng);
  CHECK(std::abs(sum / double(n) - 0.9) < 0.005);
  CHECK_THROWS_AS(pull_threshold_arm(grid, 3, rng), ContractViolation);
}

TEST_CASE("gen_serving_trace examples") {
  RngStream rng(3, 3);
  const auto trace = gen_serving_trace({-116.0, 1.0, 0.0, 4.0, 3}, rng);
  REQUIRE(trace.size() == 3);
  CHECK(trace[0] == -116.0);
  CHECK(trace[1] == -117.0);
  CHECK(trace[2] == -118.0);
  const auto flat = gen_serving_trace({-100.0, 0.0, 0.0, 4.0, 10}, rng);
  for (double y : flat) CHECK(y == -100.0);
}

TEST_CASE("serving traces respect the regularity bound") {
  RngStream rng(4, 4);
  const ServingTraceParams params{-100.0, 1.5, 2.4, 4.0, 12};
  double worst = 0.0;
  for (int t = 0; t < 100000; ++t) {
    const auto trace = gen_serving_trace(params, rng);
    for (std::size_t n = 1; n < trace.size(); ++n) worst = std::max(worst, std::abs(trace[n] - trace[n - 1]));
  }
  CHECK(worst < 4.0);
  CHECK(worst > 3.5);
}

TEST_CASE("trace params invariant") {
  CHECK_THROWS_AS((ServingTraceParams{-100.0, 2.0, 2.0, 4.0, 10}.validate()), ContractViolation);
  CHECK_THROWS_AS((ServingTraceParams{-100.0, 1.0, 0.0, 4.0, 0}.validate()), ContractViolation);
  CHECK_NOTHROW((ServingTraceParams{-100.0, 1.0, 2.9, 4.0, 10}.validate()));
}

TEST_CASE("sample_neighbor_signal examples") {
  NeighborCellSet cells{{{-110.0, 0.0, 0.9}, {-110.0, 5.0, 0.9}}};
  RngStream rng(5, 5);
  for (int i = 0; i < 100; ++i) CHECK(sample_neighbor_signal(cells, 0, rng) == -110.0);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_neighbor_signal(cells, 1, rng);
    REQUIRE(x >= -115.0);
    REQUIRE(x <= -105.0);
    sum += x;
  }
  CHECK(std::abs(sum / n + 110.0) < 0.05);
  CHECK_THROWS_AS(sample_neighbor_signal(cells, 2, rng), ContractViolation);
}

TEST_CASE("cell set validation") {
  CHECK_THROWS_AS(NeighborCellSet{}.validate(), ContractViolation);
  CHECK_THROWS_AS((NeighborCellSet{{{-110.0, 1.0, 1.2}}}.validate()), ContractViolation);
  CHECK_THROWS_AS((NeighborCellSet{{{-110.0, -1.0, 0.5}}}.validate()), ContractViolation);
}

TEST_CASE("draw_handover_outcome examples") {
  RngStream rng(6, 6);
  const FailureCurve never({{-140, 0.0}, {-60, 0.0}});
  const FailureCurve always({{-140, 1.0}, {-60, 1.0}});
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(draw_handover_outcome(never, -130.0, -130.0, rng));
    REQUIRE_FALSE(draw_handover_outcome(always, -100.0, -100.0, rng));
  }
  const FailureCurve tenth({{-140, 0.1}, {-60, 0.1}});
  const int n = 100000;
  int ok = 0;
  for (int i = 0; i < n; ++i) ok += draw_handover_outcome(tenth, -110.0, -105.0, rng);
  CHECK(std::abs(ok / double(n) - 0.81) < 0.01);
  CHECK(rng.position() == 4000 + 2 * static_cast<std::uint64_t>(n));
}

TEST_CASE("separate serving and target curves") {
  RngStream rng(7, 7);
  const FailureCurve never({{-140, 0.0}, {-60, 0.0}});
  const FailureCurve always({{-140, 1.0}, {-60, 1.0}});
  for (int i = 0; i < 100; ++i) {
    REQUIRE_FALSE(draw_handover_outcome(always, never, -100.0, -100.0, rng));
    REQUIRE_FALSE(draw_handover_outcome(never, always, -100.0, -100.0, rng));
  }
}
