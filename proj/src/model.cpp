#include "qpbound/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qpb {

namespace {

constexpr std::array<Direction, 5> kN1{{{-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
constexpr std::array<Direction, 5> kN2{{{0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};
constexpr std::array<Direction, 3> kN3{{{1, 0}, {0, 1}, {1, 1}}};
constexpr std::array<Direction, 8> kN4{
    {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

void check_in_unit_square(double rho, double sigma) {
  if (!(rho > 0.0 && rho < 1.0 && sigma > 0.0 && sigma < 1.0))
    throw DomainError("curve residual: (rho, sigma) must lie in (0,1)^2");
}

void validate_table(const RateTable& t, Component c, const char* name) {
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      if (i == 0 && j == 0) continue;
      const double rate = t(i, j);
      if (!std::isfinite(rate) || rate < 0.0)
        throw DomainError(std::string(name) + " rates must be finite and non-negative");
      if (rate != 0.0 && !in_neighborhood(c, {i, j}))
        throw DomainError(std::string(name) + " rate set for a direction outside its neighbourhood (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
}

// sigma * Q(rho, sigma) = a sigma^2 + b sigma + c for fixed rho.
struct QQuadratic {
  double a, b, c;
};

QQuadratic q_quadratic(const RateTable& q, double rho) {
  const double q00 = -q.total();
  QQuadratic out{0.0, 0.0, 0.0};
  for (int i = -1; i <= 1; ++i) {
    const double w = std::pow(rho, -i);
    out.a += w * q(i, -1);
    out.b += w * (i == 0 ? q00 : q(i, 0));
    out.c += w * q(i, 1);
  }
  return out;
}

}  // namespace

Component component_of(State s) {
  if (s.n1 < 0 || s.n2 < 0) throw DomainError("state outside the quarter plane");
  if (s.n1 > 0 && s.n2 > 0) return Component::Interior;
  if (s.n1 > 0) return Component::Horizontal;
  if (s.n2 > 0) return Component::Vertical;
  return Component::Origin;
}

std::span<const Direction> neighborhood(Component c) {
  switch (c) {
    case Component::Horizontal: return kN1;
    case Component::Vertical: return kN2;
    case Component::Origin: return kN3;
    case Component::Interior: return kN4;
  }
  return {};
}

std::span<const Direction> neighborhood(State s) { return neighborhood(component_of(s)); }

bool in_neighborhood(Component c, Direction d) {
  const auto set = neighborhood(c);
  return std::find(set.begin(), set.end(), d) != set.end();
}

int RateTable::slot(int i, int j) {
  if (i < -1 || i > 1 || j < -1 || j > 1) throw DomainError("direction outside the 3x3 stencil");
  return (i + 1) * 3 + (j + 1);
}

double RateTable::total() const {
  double sum = 0.0;
  for (int k = 0; k < 9; ++k)
    if (k != 4) sum += r_[k];
  return sum;
}

RandomWalk::RandomWalk(RateTable interior, RateTable horizontal, RateTable vertical,
                       RateTable origin, double gamma)
    : q_(interior), h_(horizontal), v_(vertical), r_(origin), gamma_(gamma) {
  validate_table(q_, Component::Interior, "interior");
  validate_table(h_, Component::Horizontal, "horizontal");
  validate_table(v_, Component::Vertical, "vertical");
  validate_table(r_, Component::Origin, "origin");
  if (!(q_.total() > 0.0)) throw DomainError("interior outflow must be positive");

  const double max_outflow = std::max({q_.total(), h_.total(), v_.total(), r_.total()});
  if (gamma_ <= 0.0) {
    gamma_ = max_outflow;
  } else if (!std::isfinite(gamma_) || gamma_ < max_outflow) {
    throw DomainError("uniformization constant below the largest outflow");
  }
}

const RateTable& RandomWalk::table(Component c) const {
  switch (c) {
    case Component::Horizontal: return h_;
    case Component::Vertical: return v_;
    case Component::Origin: return r_;
    case Component::Interior: return q_;
  }
  return q_;
}

double RandomWalk::rate(State s, Direction d) const {
  const Component c = component_of(s);
  if (!in_neighborhood(c, d)) return 0.0;
  return table(c)(d);
}

RandomWalk joint_departures_walk(double lambda, double mu, double mu_star) {
  RateTable q, h, v, r;
  q.set(1, 0, lambda);
  q.set(0, 1, lambda);
  q.set(-1, -1, mu);
  h.set(1, 0, lambda);
  h.set(0, 1, lambda);
  h.set(-1, 0, mu_star);
  v.set(1, 0, lambda);
  v.set(0, 1, lambda);
  v.set(0, -1, mu_star);
  r.set(1, 0, lambda);
  r.set(0, 1, lambda);
  return RandomWalk(q, h, v, r);
}

double curve_residual_Q(const RandomWalk& walk, double rho, double sigma) {
  check_in_unit_square(rho, sigma);
  const RateTable& q = walk.interior();
  const double q00 = -q.total();
  double sum = 0.0;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      sum += std::pow(rho, -i) * std::pow(sigma, -j) * (i == 0 && j == 0 ? q00 : q(i, j));
  return sum;
}

double curve_residual_H(const RandomWalk& walk, double rho, double sigma) {
  check_in_unit_square(rho, sigma);
  const RateTable& q = walk.interior();
  const RateTable& h = walk.horizontal();
  double lhs = h(1, 0) / rho + rho * h(-1, 0);
  double rhs = h(-1, 0) + h(1, 0);
  for (int i = -1; i <= 1; ++i) {
    lhs += std::pow(rho, -i) * sigma * q(i, -1);
    rhs += h(i, 1);
  }
  return lhs - rhs;
}

double curve_residual_V(const RandomWalk& walk, double rho, double sigma) {
  check_in_unit_square(rho, sigma);
  const RateTable& q = walk.interior();
  const RateTable& v = walk.vertical();
  double lhs = v(0, 1) / sigma + sigma * v(0, -1);
  double rhs = v(0, -1) + v(0, 1);
  for (int j = -1; j <= 1; ++j) {
    lhs += rho * std::pow(sigma, -j) * q(-1, j);
    rhs += v(1, j);
  }
  return lhs - rhs;
}

namespace {

// Both real roots of sigma * Q(rho, sigma) = 0 in increasing order (NaN when
// complex). A linear quadratic yields the same root twice.
std::array<double, 2> q_raw_roots(const RandomWalk& walk, double rho) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const auto [a, b, c] = q_quadratic(walk.interior(), rho);
  if (a == 0.0) {
    if (b == 0.0) return {nan, nan};
    return {-c / b, -c / b};
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {nan, nan};
  const double t = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  if (t == 0.0) return {0.0, 0.0};
  const double r1 = t / a, r2 = c / t;
  return {std::min(r1, r2), std::max(r1, r2)};
}

}  // namespace

std::vector<double> q_sigma_branches(const RandomWalk& walk, double rho) {
  const auto raw = q_raw_roots(walk, rho);
  std::vector<double> roots;
  for (double s : raw)
    if (s > 0.0 && s < 1.0 && (roots.empty() || roots.back() != s)) roots.push_back(s);
  return roots;
}

std::vector<CurvePoint> intersect_Q_with(Curve curve, const RandomWalk& walk) {
  constexpr int kSamples = 2000;
  constexpr double kLo = 1e-6;
  constexpr double kHi = 1.0 - 1e-6;
  constexpr double kMembership = 1e-10;

  // Branch b of Q as a function of rho; NaN where it leaves (0,1).
  auto branch = [&](double rho, int b) {
    const double sigma = q_raw_roots(walk, rho)[static_cast<std::size_t>(b)];
    return sigma > 0.0 && sigma < 1.0 ? sigma : std::numeric_limits<double>::quiet_NaN();
  };
  auto second = [&](double rho, double sigma) {
    return curve == Curve::H ? curve_residual_H(walk, rho, sigma)
                             : curve_residual_V(walk, rho, sigma);
  };
  auto along = [&](double rho, int b) {
    const double sigma = branch(rho, b);
    if (std::isnan(sigma)) return sigma;
    return second(rho, sigma);
  };

  std::vector<CurvePoint> found;
  auto accept = [&](double rho, int b) {
    const double sigma = branch(rho, b);
    if (std::isnan(sigma)) return;
    if (std::abs(curve_residual_Q(walk, rho, sigma)) >= kMembership) return;
    if (std::abs(second(rho, sigma)) >= kMembership) return;
    for (const auto& p : found)
      if (std::abs(p.rho - rho) < 1e-9 && std::abs(p.sigma - sigma) < 1e-9) return;
    found.push_back({rho, sigma});
  };

  for (int b = 0; b < 2; ++b) {
    double prev_rho = kLo;
    double prev_val = along(prev_rho, b);
    for (int k = 1; k <= kSamples; ++k) {
      const double rho = kLo + (kHi - kLo) * k / kSamples;
      const double val = along(rho, b);
      if (val == 0.0) accept(rho, b);
      if (!std::isnan(val) && !std::isnan(prev_val) && prev_val * val < 0.0) {
        double lo = prev_rho, hi = rho, flo = prev_val;
        for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          const double fm = along(mid, b);
          if (std::isnan(fm)) break;
          if (fm == 0.0) {
            lo = hi = mid;
            break;
          }
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        const double fl = along(lo, b), fh = along(hi, b);
        accept(std::abs(fl) <= std::abs(fh) ? lo : hi, b);
      }
      prev_rho = rho;
      prev_val = val;
    }
  }
  if (found.empty())
    throw NoIntersection(curve == Curve::H ? "Q and H do not intersect in (0,1)^2"
                                           : "Q and V do not intersect in (0,1)^2");
  std::sort(found.begin(), found.end(),
            [](const CurvePoint& x, const CurvePoint& y) { return x.rho < y.rho; });
  return found;
}

}  // namespace qpb
