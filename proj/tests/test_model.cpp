#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qpbound/model.hpp"
#include "random_walks.hpp"

using namespace qpb;

namespace {

struct Geometric {
  double rho, sigma;
  double operator()(State s) const { return std::pow(rho, s.n1) * std::pow(sigma, s.n2); }
};

// Balance residual of a single term divided by its mass at s.
double relative_balance(const RandomWalk& w, double rho, double sigma, State s) {
  const Geometric g{rho, sigma};
  return balance_residual(w, g, s) / g(s);
}

}  // namespace

TEST(Model, ComponentsAndNeighbourhoods) {
  EXPECT_EQ(component_of({0, 0}), Component::Origin);
  EXPECT_EQ(component_of({3, 0}), Component::Horizontal);
  EXPECT_EQ(component_of({0, 7}), Component::Vertical);
  EXPECT_EQ(component_of({2, 2}), Component::Interior);
  EXPECT_THROW(component_of({-1, 0}), DomainError);

  EXPECT_EQ(neighborhood(Component::Interior).size(), 8u);
  EXPECT_EQ(neighborhood(Component::Horizontal).size(), 5u);
  EXPECT_EQ(neighborhood(Component::Vertical).size(), 5u);
  EXPECT_EQ(neighborhood(Component::Origin).size(), 3u);
  EXPECT_FALSE(in_neighborhood(Component::Horizontal, {0, -1}));
  EXPECT_FALSE(in_neighborhood(Component::Origin, {-1, 0}));
  EXPECT_TRUE(in_neighborhood(Component::Vertical, {1, -1}));
}

TEST(Model, RejectsRatesOutsideNeighbourhood) {
  RateTable q, h, v, r;
  q.set(1, 0, 0.2);
  q.set(-1, -1, 0.6);
  h.set(0, -1, 0.1);
  EXPECT_THROW(RandomWalk(q, h, v, r), DomainError);
  RateTable bad;
  bad.set(1, 0, -0.1);
  EXPECT_THROW(RandomWalk(bad, RateTable{}, RateTable{}, RateTable{}), DomainError);
  EXPECT_THROW(RateTable{}.set(2, 0, 1.0), DomainError);
}

TEST(Model, JointDeparturesRates) {
  const RandomWalk w = joint_departures_walk(0.2, 0.6, 0.18);
  EXPECT_DOUBLE_EQ(w.rate({4, 4}, {-1, -1}), 0.6);
  EXPECT_DOUBLE_EQ(w.rate({4, 4}, {1, 0}), 0.2);
  EXPECT_DOUBLE_EQ(w.rate({4, 0}, {-1, 0}), 0.18);
  EXPECT_DOUBLE_EQ(w.rate({0, 4}, {0, -1}), 0.18);
  EXPECT_DOUBLE_EQ(w.rate({0, 0}, {1, 0}), 0.2);
  EXPECT_DOUBLE_EQ(w.rate({4, 0}, {-1, -1}), 0.0);
  EXPECT_NEAR(w.gamma(), 1.0, 1e-15);
}

TEST(Model, CurveResidualsMatchBalanceEquations) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int rep = 0; rep < 20; ++rep) {
    const RandomWalk w = fixtures::random_walk(rng);
    const double rho = u(rng), sigma = u(rng);
    EXPECT_NEAR(curve_residual_Q(w, rho, sigma), relative_balance(w, rho, sigma, {5, 6}), 1e-11);
    EXPECT_NEAR(curve_residual_H(w, rho, sigma), relative_balance(w, rho, sigma, {5, 0}), 1e-11);
    EXPECT_NEAR(curve_residual_V(w, rho, sigma), relative_balance(w, rho, sigma, {0, 5}), 1e-11);
  }
}

TEST(Model, QBranchesLieOnQ) {
  std::mt19937_64 rng(12);
  int found = 0;
  for (int rep = 0; rep < 30; ++rep) {
    const RandomWalk w = fixtures::random_walk(rng);
    for (double rho = 0.05; rho < 1.0; rho += 0.05) {
      const auto roots = q_sigma_branches(w, rho);
      for (std::size_t k = 0; k < roots.size(); ++k) {
        ++found;
        EXPECT_GT(roots[k], 0.0);
        EXPECT_LT(roots[k], 1.0);
        if (k > 0) EXPECT_LE(roots[k - 1], roots[k]);
        EXPECT_NEAR(curve_residual_Q(w, rho, roots[k]), 0.0, 1e-10);
      }
    }
  }
  EXPECT_GT(found, 100);
}

TEST(Model, ProductFormPointSolvesCubic) {
  // Both axis service rates mu/2: rho = sigma with mu rho^2 + mu rho - 2 lambda = 0.
  const double lambda = 0.2, mu = 0.6;
  const RandomWalk w = joint_departures_walk(lambda, mu, mu / 2.0);
  const double r = (-mu + std::sqrt(mu * mu + 8.0 * lambda * mu)) / (2.0 * mu);
  EXPECT_NEAR(curve_residual_Q(w, r, r), 0.0, 1e-14);
  EXPECT_NEAR(curve_residual_H(w, r, r), 0.0, 1e-14);
  EXPECT_NEAR(curve_residual_V(w, r, r), 0.0, 1e-14);
  EXPECT_NEAR(r, 0.4574, 1e-4);
}

TEST(Model, IntersectionsAgreeWithScan) {
  const RandomWalk w = joint_departures_walk(0.2, 0.6, 0.18);
  const auto h = intersect_Q_with(Curve::H, w);
  const auto v = intersect_Q_with(Curve::V, w);
  ASSERT_EQ(h.size(), 1u);
  ASSERT_EQ(v.size(), 1u);
  for (const auto& p : h) {
    EXPECT_NEAR(curve_residual_Q(w, p.rho, p.sigma), 0.0, 1e-10);
    EXPECT_NEAR(curve_residual_H(w, p.rho, p.sigma), 0.0, 1e-10);
  }
  for (const auto& p : v) {
    EXPECT_NEAR(curve_residual_Q(w, p.rho, p.sigma), 0.0, 1e-10);
    EXPECT_NEAR(curve_residual_V(w, p.rho, p.sigma), 0.0, 1e-10);
  }
  // Symmetric model: the two intersections are mirror images.
  EXPECT_NEAR(h[0].rho, v[0].sigma, 1e-9);
  EXPECT_NEAR(h[0].sigma, v[0].rho, 1e-9);

  // Brute-force: H is linear in sigma, so sigma_H(rho) is explicit; scan Q
  // along it for a sign change.
  const auto sigma_H = [&](double rho) {
    const double a = curve_residual_H(w, rho, 0.25), b = curve_residual_H(w, rho, 0.75);
    return 0.25 - a * 0.5 / (b - a);
  };
  double best = 1.0, best_rho = 0.0;
  for (int k = 1; k < 100000; ++k) {
    const double rho = k / 100000.0, s = sigma_H(rho);
    if (s <= 0.0 || s >= 1.0) continue;
    const double res = std::abs(curve_residual_Q(w, rho, s));
    if (res < best) best = res, best_rho = rho;
  }
  EXPECT_NEAR(best_rho, h[0].rho, 2e-5);
}

TEST(Model, NoIntersectionThrows) {
  // Axis rates far larger than the interior push H away from Q.
  RateTable q, h, v, r;
  q.set(1, 0, 0.1);
  q.set(0, 1, 0.1);
  q.set(-1, -1, 0.8);
  h.set(1, 0, 5.0);
  h.set(0, 1, 0.1);
  v.set(0, 1, 5.0);
  v.set(1, 0, 0.1);
  r.set(1, 0, 0.1);
  const RandomWalk w(q, h, v, r);
  EXPECT_THROW(intersect_Q_with(Curve::H, w), NoIntersection);
}
