#pragma once

#include <vector>

namespace qpb {

/// minimize c^T x  subject to  A x >= b,  x_j >= 0 unless free[j].
struct LinearProgram {
  std::vector<double> c;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<bool> free;  ///< empty means all variables are non-negative
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  /// One multiplier per constraint row, >= 0 at optimality.
  std::vector<double> y;
  double objective = 0.0;
  int pivots = 0;
};

/// Dense two-phase tableau simplex with Bland's rule.
LpSolution solve_lp(const LinearProgram& lp);

/// Largest violation among primal feasibility, dual feasibility and
/// complementary slackness for a candidate primal/dual pair.
double complementary_slackness_residual(const LinearProgram& lp, const std::vector<double>& x,
                                        const std::vector<double>& y);

}  // namespace qpb
