#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "qpbound/biaslp.hpp"

namespace qpb::fixtures {

inline double binom(int m, int k) {
  return std::tgamma(m + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(m - k + 1.0));
}

// Taylor coefficient of order k of B at n = 1.
inline double taylor(const std::vector<double>& b, int k) {
  double s = 0.0;
  for (int m = k; m < static_cast<int>(b.size()); ++m) s += binom(m, k) * b[m];
  return s;
}

// Restores feasibility by raising the leading coefficient (Taylor rows) and
// then the constant term (window rows).
inline void repair_axis(std::vector<double>& b, const std::vector<double>& d, int window) {
  const int M = static_cast<int>(b.size()) - 1;
  for (int k = 1; k <= M; ++k) {
    const double t = taylor(b, k);
    if (t < 0.0) b[M] += -t / binom(M, k) * (1 + 1e-12);
  }
  double lift = 0.0;
  for (int n = 1; n <= window; ++n) {
    double v = 0.0;
    for (int m = M; m >= 0; --m) v = v * n + b[m];
    lift = std::max(lift, d[n - 1] - v);
  }
  b[0] += lift;
}

inline bool feasible(const BiasLpProblem& p, const BiasBounds& b, double tol) {
  for (int n = 1; n <= p.window; ++n)
    if (b.B1(n) < p.d1[n - 1] - tol || b.B2(n) < p.d2[n - 1] - tol) return false;
  for (int k = 1; k <= p.degree; ++k)
    if (taylor(b.b1, k) < -tol || taylor(b.b2, k) < -tol) return false;
  return b.b3 >= p.d0 - tol;
}

// Perturbs an LP solution, restores feasibility and returns the smallest
// objective found minus the optimum over `trials` attempts.
template <typename Rng>
double worst_perturbation_gain(const BiasLpProblem& p, const BiasLpSolution& s, Rng& rng,
                               int trials, bool& all_feasible) {
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 1e300;
  all_feasible = true;
  for (int trial = 0; trial < trials; ++trial) {
    BiasBounds b = s.bounds;
    const double eps = std::pow(10.0, -1.0 - (trial % 6));
    for (int m = 0; m <= p.degree; ++m) {
      b.b1[m] += eps * g(rng) / std::pow(p.window, m);
      b.b2[m] += eps * g(rng) / std::pow(p.window, m);
    }
    b.b3 += eps * g(rng);
    repair_axis(b.b1, p.d1, p.window);
    repair_axis(b.b2, p.d2, p.window);
    b.b3 = std::max(b.b3, p.d0);
    all_feasible = all_feasible && feasible(p, b, 1e-9);
    worst = std::min(worst, p.objective.apply(b) - s.objective);
  }
  return worst;
}

}  // namespace qpb::fixtures
