#pragma once

#include <string>
#include <vector>

#include "qpbound/errorbound.hpp"
#include "qpbound/oracle.hpp"
#include "qpbound/simplex.hpp"

namespace qpb {

/// Choice of bias-bound coefficients as a linear program: minimise the
/// error bound over (b1[0..M], b2[0..M], b3) subject to the polynomial bounds
/// dominating the oracle's bias terms on the axis window n = 1..window.
struct BiasLpProblem {
  int degree = 0;
  int window = 100;
  BoundCoefficients objective;
  std::vector<double> d1;  ///< sup_abs(n, 0), n = 1..window
  std::vector<double> d2;  ///< sup_abs(0, n), n = 1..window
  double d0 = 0.0;         ///< sup_abs(0, 0)

  /// Variables y = (b1[m] w^m, b2[m] w^m, b3) with w = window, constraints
  /// B(n) >= d(n), B3 >= d0, and for degree >= 1 non-negative Taylor
  /// coefficients of order >= 1 at n = 1, which keeps B nondecreasing on
  /// n >= 1. These rows do not depend on the window, so a larger window
  /// only adds constraints.
  LinearProgram linear_program() const;
  /// Maps an LP solution vector back to bias-bound coefficients.
  BiasBounds unscale(const std::vector<double>& y) const;
};

/// Throws IllPosed when an objective multiplier is negative.
BiasLpProblem assemble(const BoundCoefficients& objective, const BiasTable& bias, int degree,
                       int window = 100);
BiasLpProblem assemble(const RandomWalk& base, const PerturbedWalk& walk, const BiasTable& bias,
                       int degree, int window = 100);

struct BiasLpSolution {
  BiasBounds bounds;
  double objective = 0.0;
  double cs_residual = 0.0;
  int pivots = 0;
  std::string label = "empirically certified";
};

/// Degree 0 is solved in closed form (componentwise maxima); higher degrees
/// by the simplex. Throws Infeasible or Unbounded.
BiasLpSolution solve(const BiasLpProblem& problem);

}  // namespace qpb
