#pragma once

#include <array>
#include <concepts>
#include <span>
#include <vector>

#include "qpbound/errors.hpp"

namespace qpb {

struct State {
  int n1 = 0;
  int n2 = 0;

  friend bool operator==(const State&, const State&) = default;
};

/// Nearest-neighbour displacement (i, j) with i, j in {-1, 0, 1}.
struct Direction {
  int i = 0;
  int j = 0;

  friend bool operator==(const Direction&, const Direction&) = default;
  Direction reversed() const { return {-i, -j}; }
};

/// The four components of the quarter plane. The numbering follows the
/// transition sets N1..N4 of the model.
enum class Component { Horizontal = 1, Vertical = 2, Origin = 3, Interior = 4 };

Component component_of(State s);

/// Allowed non-zero transitions of a component (N1..N4).
std::span<const Direction> neighborhood(Component c);
std::span<const Direction> neighborhood(State s);
bool in_neighborhood(Component c, Direction d);

/// Rates indexed by direction over the 3x3 stencil. The (0,0) slot is unused.
class RateTable {
 public:
  double operator()(int i, int j) const { return r_[slot(i, j)]; }
  double operator()(Direction d) const { return r_[slot(d.i, d.j)]; }
  void set(int i, int j, double rate) { r_[slot(i, j)] = rate; }
  void set(Direction d, double rate) { set(d.i, d.j, rate); }

  /// Sum of all rates in the table (the outflow of a state using it).
  double total() const;

 private:
  static int slot(int i, int j);
  std::array<double, 9> r_{};
};

/// Homogeneous quarter-plane random walk: one rate table per component plus
/// a uniformization constant.
class RandomWalk {
 public:
  /// gamma <= 0 selects the smallest valid constant (the largest outflow).
  RandomWalk(RateTable interior, RateTable horizontal, RateTable vertical, RateTable origin,
             double gamma = 0.0);

  const RateTable& interior() const { return q_; }
  const RateTable& horizontal() const { return h_; }
  const RateTable& vertical() const { return v_; }
  const RateTable& origin() const { return r_; }
  const RateTable& table(Component c) const;
  double gamma() const { return gamma_; }

  double rate(State s, Direction d) const;
  double outflow(Component c) const { return table(c).total(); }

 private:
  RateTable q_, h_, v_, r_;
  double gamma_;
};

/// Two queues with arrivals lambda each, joint service mu, and degraded
/// single-queue service mu_star on the axes.
RandomWalk joint_departures_walk(double lambda, double mu, double mu_star);

/// Anything that can report a transition rate out of a state.
template <typename W>
concept RateField = requires(const W& w, State s, Direction d) {
  { w.rate(s, d) } -> std::convertible_to<double>;
};

// ---------------------------------------------------------------------------
// Characteristic curves. Each residual is zero exactly on the curve.

double curve_residual_Q(const RandomWalk& walk, double rho, double sigma);
double curve_residual_H(const RandomWalk& walk, double rho, double sigma);
double curve_residual_V(const RandomWalk& walk, double rho, double sigma);

enum class Curve { H, V };

struct CurvePoint {
  double rho = 0.0;
  double sigma = 0.0;
};

/// Roots of sigma * Q(rho, sigma) = 0 for fixed rho that lie in (0,1),
/// ordered by increasing sigma. Empty when none exist.
std::vector<double> q_sigma_branches(const RandomWalk& walk, double rho);

/// All points of Q intersected with H (or V) inside the open unit square.
/// Throws NoIntersection when the scan finds none.
std::vector<CurvePoint> intersect_Q_with(Curve curve, const RandomWalk& walk);

// ---------------------------------------------------------------------------

/// Global balance residual of the measure `pi` at state s:
/// inflow from all neighbours minus outflow.
template <RateField W, typename Measure>
double balance_residual(const W& walk, const Measure& pi, State s) {
  double inflow = 0.0;
  double outflow = 0.0;
  for (const Direction d : neighborhood(s)) {
    const State from{s.n1 + d.i, s.n2 + d.j};
    inflow += pi(from) * walk.rate(from, d.reversed());
    outflow += walk.rate(s, d);
  }
  return inflow - pi(s) * outflow;
}

}  // namespace qpb
