#include "qpbound/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpbound/errors.hpp"

namespace qpb {

namespace {

constexpr double kEps = 1e-11;

struct Tableau {
  int rows = 0;
  int cols = 0;  // without the right-hand side
  std::vector<std::vector<double>> t;  // rows x (cols + 1)
  std::vector<double> cost;            // reduced costs, cols + 1 (last = -objective)
  std::vector<int> basis;

  void pivot(int r, int c) {
    auto& pr = t[r];
    const double inv = 1.0 / pr[c];
    for (double& v : pr) v *= inv;
    pr[c] = 1.0;
    for (int i = 0; i < rows; ++i) {
      if (i == r) continue;
      const double f = t[i][c];
      if (f == 0.0) continue;
      for (int j = 0; j <= cols; ++j) t[i][j] -= f * pr[j];
      t[i][c] = 0.0;
    }
    const double f = cost[c];
    if (f != 0.0) {
      for (int j = 0; j <= cols; ++j) cost[j] -= f * pr[j];
      cost[c] = 0.0;
    }
    basis[r] = c;
  }

  void price(const std::vector<double>& c) {
    cost.assign(static_cast<std::size_t>(cols) + 1, 0.0);
    for (int j = 0; j < cols; ++j) cost[j] = c[j];
    for (int i = 0; i < rows; ++i) {
      const double cb = c[basis[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j <= cols; ++j) cost[j] -= cb * t[i][j];
    }
  }

  // Bland's rule; columns >= limit may not enter. Returns false if unbounded.
  bool optimize(int limit, int& pivots) {
    for (;;) {
      int enter = -1;
      for (int j = 0; j < limit; ++j)
        if (cost[j] < -kEps) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows; ++i) {
        if (t[i][enter] <= kEps) continue;
        const double ratio = t[i][cols] / t[i][enter];
        if (ratio < best - kEps || (ratio <= best + kEps && leave >= 0 && basis[i] < basis[leave])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++pivots;
    }
  }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  const int n = static_cast<int>(lp.c.size());
  const int m = static_cast<int>(lp.A.size());
  if (static_cast<int>(lp.b.size()) != m) throw DomainError("LP right-hand side size mismatch");
  for (const auto& row : lp.A)
    if (static_cast<int>(row.size()) != n) throw DomainError("LP constraint row size mismatch");
  auto is_free = [&](int j) { return !lp.free.empty() && lp.free[j]; };

  // Columns: structural (+ and - parts for free variables), surplus, artificial.
  std::vector<int> plus_col(n), minus_col(n, -1);
  int cols = 0;
  for (int j = 0; j < n; ++j) {
    plus_col[j] = cols++;
    if (is_free(j)) minus_col[j] = cols++;
  }
  const int surplus0 = cols;
  cols += m;
  const int art0 = cols;
  cols += m;

  Tableau tab;
  tab.rows = m;
  tab.cols = cols;
  tab.t.assign(m, std::vector<double>(static_cast<std::size_t>(cols) + 1, 0.0));
  tab.basis.resize(m);
  std::vector<double> sign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    sign[i] = lp.b[i] < 0.0 ? -1.0 : 1.0;
    auto& row = tab.t[i];
    for (int j = 0; j < n; ++j) {
      row[plus_col[j]] = sign[i] * lp.A[i][j];
      if (minus_col[j] >= 0) row[minus_col[j]] = -sign[i] * lp.A[i][j];
    }
    row[surplus0 + i] = -sign[i];
    row[art0 + i] = 1.0;
    row[cols] = sign[i] * lp.b[i];
    tab.basis[i] = art0 + i;
  }

  LpSolution sol;
  std::vector<double> phase1(static_cast<std::size_t>(cols), 0.0);
  for (int i = 0; i < m; ++i) phase1[art0 + i] = 1.0;
  tab.price(phase1);
  tab.optimize(art0, sol.pivots);
  if (-tab.cost[cols] > 1e-9) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }
  // Drive zero-level artificials out of the basis where possible.
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] < art0) continue;
    for (int j = 0; j < art0; ++j) {
      if (std::abs(tab.t[i][j]) > 1e-9) {
        tab.pivot(i, j);
        ++sol.pivots;
        break;
      }
    }
  }

  std::vector<double> phase2(static_cast<std::size_t>(cols), 0.0);
  for (int j = 0; j < n; ++j) {
    phase2[plus_col[j]] = lp.c[j];
    if (minus_col[j] >= 0) phase2[minus_col[j]] = -lp.c[j];
  }
  tab.price(phase2);
  if (!tab.optimize(art0, sol.pivots)) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  std::vector<double> value(static_cast<std::size_t>(cols), 0.0);
  for (int i = 0; i < m; ++i) value[tab.basis[i]] = tab.t[i][cols];
  sol.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    sol.x[j] = value[plus_col[j]];
    if (minus_col[j] >= 0) sol.x[j] -= value[minus_col[j]];
  }
  // y^T = c_B^T B^{-1}; B^{-1} sits in the artificial columns.
  sol.y.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double yi = 0.0;
    for (int r = 0; r < m; ++r) yi += phase2[tab.basis[r]] * tab.t[r][art0 + i];
    sol.y[i] = sign[i] * yi;
  }
  sol.objective = 0.0;
  for (int j = 0; j < n; ++j) sol.objective += lp.c[j] * sol.x[j];
  sol.status = LpStatus::Optimal;
  return sol;
}

double complementary_slackness_residual(const LinearProgram& lp, const std::vector<double>& x,
                                        const std::vector<double>& y) {
  const std::size_t n = lp.c.size(), m = lp.A.size();
  double worst = 0.0;
  std::vector<double> reduced(lp.c);
  for (std::size_t i = 0; i < m; ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      ax += lp.A[i][j] * x[j];
      reduced[j] -= lp.A[i][j] * y[i];
    }
    const double slack = ax - lp.b[i];
    worst = std::max({worst, -slack, -y[i], std::abs(y[i] * slack)});
  }
  for (std::size_t j = 0; j < n; ++j) {
    const bool is_free = !lp.free.empty() && lp.free[j];
    if (is_free) {
      worst = std::max(worst, std::abs(reduced[j]));
    } else {
      worst = std::max({worst, -x[j], -reduced[j], std::abs(x[j] * reduced[j])});
    }
  }
  return worst;
}

}  // namespace qpb
