#include "qpbound/biaslp.hpp"

#include <algorithm>
#include <cmath>

namespace qpb {

namespace {

constexpr double kMultiplierSlack = 1e-12;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_multipliers(BoundCoefficients& obj) {
  auto fix = [](double& v) {
    if (v < -kMultiplierSlack) throw IllPosed("error bound has a negative multiplier");
    v = std::max(v, 0.0);
  };
  for (double& v : obj.b1) fix(v);
  for (double& v : obj.b2) fix(v);
  fix(obj.b3);
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

LinearProgram BiasLpProblem::linear_program() const {
  const int M = degree;
  const int nv = 2 * (M + 1) + 1;
  const double w = window;
  LinearProgram lp;
  lp.c.assign(static_cast<std::size_t>(nv), 0.0);
  for (int m = 0; m <= M; ++m) {
    lp.c[m] = objective.b1[m] / std::pow(w, m);
    lp.c[M + 1 + m] = objective.b2[m] / std::pow(w, m);
  }
  lp.c[nv - 1] = objective.b3;
  lp.free.assign(static_cast<std::size_t>(nv), true);

  auto add_row = [&](std::vector<double> row, double rhs) {
    lp.A.push_back(std::move(row));
    lp.b.push_back(rhs);
  };
  for (int axis = 0; axis < 2; ++axis) {
    const auto& d = axis == 0 ? d1 : d2;
    const int off = axis * (M + 1);
    for (int n = 1; n <= window; ++n) {
      std::vector<double> row(static_cast<std::size_t>(nv), 0.0);
      for (int m = 0; m <= M; ++m) row[off + m] = std::pow(n / w, m);
      add_row(std::move(row), d[n - 1]);
    }
    for (int k = 1; k <= M; ++k) {
      std::vector<double> row(static_cast<std::size_t>(nv), 0.0);
      for (int m = k; m <= M; ++m) row[off + m] = binomial(m, k) * std::pow(w, k - m);
      add_row(std::move(row), 0.0);
    }
  }
  std::vector<double> row(static_cast<std::size_t>(nv), 0.0);
  row[nv - 1] = 1.0;
  add_row(std::move(row), d0);
  return lp;
}

BiasBounds BiasLpProblem::unscale(const std::vector<double>& y) const {
  BiasBounds b;
  b.b1.assign(static_cast<std::size_t>(degree) + 1, 0.0);
  b.b2.assign(static_cast<std::size_t>(degree) + 1, 0.0);
  double scale = 1.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  // Pivoting roundoff can leave -1e-17 where the constraints force >= 0.
  auto snap = [scale](double v) { return (v < 0.0 && v > -1e-9 * scale) ? 0.0 : v; };
  for (int m = 0; m <= degree; ++m) {
    b.b1[m] = snap(y[m]) / std::pow(window, m);
    b.b2[m] = snap(y[degree + 1 + m]) / std::pow(window, m);
  }
  b.b3 = snap(y.back());
  return b;
}

BiasLpProblem assemble(const BoundCoefficients& objective, const BiasTable& bias, int degree,
                       int window) {
  if (degree < 0) throw DomainError("bias bound degree must be non-negative");
  if (window < 1 || window >= bias.size())
    throw DomainError("constraint window must lie inside the truncated grid");
  if (static_cast<int>(objective.b1.size()) != degree + 1 ||
      static_cast<int>(objective.b2.size()) != degree + 1)
    throw DomainError("objective degree does not match");
  BiasLpProblem p;
  p.degree = degree;
  p.window = window;
  p.objective = objective;
  check_multipliers(p.objective);
  for (int n = 1; n <= window; ++n) {
    p.d1.push_back(bias.sup_abs({n, 0}));
    p.d2.push_back(bias.sup_abs({0, n}));
  }
  p.d0 = bias.sup_abs({0, 0});
  return p;
}

BiasLpProblem assemble(const RandomWalk& base, const PerturbedWalk& walk, const BiasTable& bias,
                       int degree, int window) {
  return assemble(bound_coefficients(base, walk, degree), bias, degree, window);
}

BiasLpSolution solve(const BiasLpProblem& problem) {
  BiasLpSolution out;
  if (problem.degree == 0) {
    out.bounds = BiasBounds::constant(max_of(problem.d1), max_of(problem.d2), problem.d0);
    out.objective = problem.objective.apply(out.bounds);
    out.cs_residual = 0.0;
    return out;
  }
  const LinearProgram lp = problem.linear_program();
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::Infeasible) throw Infeasible("bias-bound LP has no feasible point");
  if (sol.status == LpStatus::Unbounded) throw Unbounded("bias-bound LP objective is unbounded");
  out.bounds = problem.unscale(sol.x);
  out.objective = problem.objective.apply(out.bounds);
  out.cs_residual = complementary_slackness_residual(lp, sol.x, sol.y);
  out.pivots = sol.pivots;
  return out;
}

}  // namespace qpb
