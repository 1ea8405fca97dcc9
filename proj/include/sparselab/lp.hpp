#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sparselab {

enum class LpStatus { optimal, unbounded, infeasible, iteration_limit };

std::string to_string(LpStatus s);

struct LpResult {
  LpStatus status = LpStatus::optimal;
  double objective = 0.0;
  std::vector<double> x;
  /// Dual values of the rows of A (zero for basic slacks).
  std::vector<double> duals;
  std::uint64_t pivots = 0;
};

/// maximize c·x subject to A x <= b, x >= 0. Dense tableau simplex with
/// smallest-index tie breaking. On the pivot cap the current (feasible) basic
/// solution is returned with status iteration_limit.
LpResult solve_lp(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                  const std::vector<double>& c, std::uint64_t max_pivots = 1000000, double eps = 1e-9);

}  // namespace sparselab
