#pragma once
/**
 * @file simplex.hpp
 * @brief Dense two-phase simplex for the small equality-form LPs
 *        max c.x  s.t.  A x = b,  x >= 0.
 *
 * Bland's rule throughout, so degenerate martingale polytopes cannot cycle.
 * Problem sizes here are tiny (tens of variables), dense tableaus are fine.
 */

#include <vector>

namespace reserve::lp {

enum class Status { optimal, infeasible, unbounded };

struct Result {
  Status status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

// Feasibility / optimality tolerances.
inline constexpr double kFeasTol = 1e-10;
inline constexpr double kOptTol = 1e-10;

/// Solves max c.x s.t. A x = b, x >= 0 (A is m rows of size n).
Result maximize(const std::vector<std::vector<double>>& A,
                const std::vector<double>& b, const std::vector<double>& c);

}  // namespace reserve::lp
