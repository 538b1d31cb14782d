#pragma once

namespace qpb {

/// Li_{-m}(z) = sum_{k>=1} k^m z^k for integer m >= 0 and 0 < z < 1.
///
/// Evaluated through the Eulerian-number closed form
///   Li_{-m}(z) = z * sum_j A(m, j) z^j / (1 - z)^{m+1},
/// whose terms are all positive, so there is no cancellation even for z
/// close to one where the series converges slowly.
double polylog_neg(int m, double z);

/// sum_{n>=0} n^m z^n with the convention 0^0 = 1, i.e. Li_{-m}(z) + [m == 0].
double power_series(int m, double z);

/// Tail sum_{n>N} n^m z^n, computed without subtracting from the full sum.
double power_series_tail(int m, double z, int N);

}  // namespace qpb
