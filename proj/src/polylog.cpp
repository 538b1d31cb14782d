#include "qpbound/polylog.hpp"

#include <cmath>
#include <vector>

#include "qpbound/errors.hpp"

namespace qpb {

namespace {

void check_args(int m, double z) {
  if (m < 0) throw DomainError("polylog_neg: order must be non-negative");
  if (!(z > 0.0 && z < 1.0)) throw DomainError("polylog_neg: argument must lie in (0,1)");
}

// Row m of the Eulerian triangle, A(m, 0..m-1).
std::vector<double> eulerian_row(int m) {
  std::vector<double> row{1.0};
  for (int n = 2; n <= m; ++n) {
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
      const double keep = j < n - 1 ? (j + 1) * row[static_cast<std::size_t>(j)] : 0.0;
      const double shift = j > 0 ? (n - j) * row[static_cast<std::size_t>(j - 1)] : 0.0;
      next[static_cast<std::size_t>(j)] = keep + shift;
    }
    row = std::move(next);
  }
  return row;
}

}  // namespace

double polylog_neg(int m, double z) {
  check_args(m, z);
  if (m == 0) return z / (1.0 - z);
  const auto row = eulerian_row(m);
  double poly = 0.0;
  for (auto it = row.rbegin(); it != row.rend(); ++it) poly = poly * z + *it;
  return z * poly / std::pow(1.0 - z, m + 1);
}

double power_series(int m, double z) {
  return polylog_neg(m, z) + (m == 0 ? 1.0 : 0.0);
}

double power_series_tail(int m, double z, int N) {
  check_args(m, z);
  if (N < 0) return power_series(m, z);
  // sum_{j>=0} (N+1+j)^m z^j = sum_l C(m,l) (N+1)^{m-l} sum_j j^l z^j
  const double base = N + 1.0;
  double inner = 0.0;
  double binom = 1.0;
  for (int l = 0; l <= m; ++l) {
    inner += binom * std::pow(base, m - l) * power_series(l, z);
    binom = binom * (m - l) / (l + 1);
  }
  return std::pow(z, N + 1) * inner;
}

}  // namespace qpb
