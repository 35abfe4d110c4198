#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "batt/env.hpp"

// Brute-force references. Nothing here calls into the search, analysis or
// policy code it is used to check; only plain data types are shared.
namespace batt::verify {

struct OracleReport {
  std::string instance;
  std::string oracle_value;
  std::string algorithm_value;
  bool agreement = false;
  double tolerance = 0.0;

  std::string line() const;
};

OracleReport compare(std::string instance, double oracle, double algorithm, double tolerance);
OracleReport compare(std::string instance, std::size_t oracle, std::size_t algorithm);

// Linear scan for the first success probability >= threshold (0-based).
// Throws ContractViolation when no entry qualifies.
std::size_t brute_force_threshold(std::span<const double> success_probs, double threshold);

// h(eps) = eps T + 3 T J exp(-2 delta^2 (eps T / lnJ - 1)).
double exploration_objective(std::size_t arms, std::uint64_t rounds, double delta, double epsilon);

// Dense scan of h over eps in (0, 1] at the given step (<= 1e-4).
double grid_min_epsilon(std::size_t arms, std::uint64_t rounds, double delta,
                        double resolution = 1e-5);

/// A frozen handover instance: deterministic cell signals, one serving trace
/// and a failure curve given by knots (interpolated locally).
struct OrderingInstance {
  std::vector<Dbm> cell_signal;
  std::vector<Dbm> serving_trace;  // Y observed with measurement n
  std::vector<CurveKnot> curve;
};

struct OrderValue {
  std::vector<std::size_t> order;
  double expected_success = 0.0;
};

struct BestOrder {
  OrderValue best;
  std::vector<OrderValue> all;  // every permutation, lexicographic
};

// Expected success of measuring cells in `order` under the benchmark
// handover rule (best target above serving signal, or all cells measured).
double expected_success_of_order(const OrderingInstance& instance,
                                 std::span<const std::size_t> order);

// Enumerates all K! orders; refuses K > 5 with ContractViolation.
BestOrder exhaustive_best_order(const OrderingInstance& instance);

}  // namespace batt::verify
