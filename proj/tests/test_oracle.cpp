#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "qpbound/errorbound.hpp"
#include "qpbound/experiments.hpp"
#include "qpbound/oracle.hpp"
#include "random_walks.hpp"

using namespace qpb;

namespace {

// Uniformized transition matrix on [0,N]^2 built straight from the rates.
Eigen::MatrixXd dense_kernel(const RandomWalk& w, int N, double gamma) {
  const int n = (N + 1) * (N + 1);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a <= N; ++a)
    for (int b = 0; b <= N; ++b) {
      const int k = a * (N + 1) + b;
      double moved = 0.0;
      for (const Direction d : neighborhood(State{a, b})) {
        const int a2 = a + d.i, b2 = b + d.j;
        if (a2 > N || b2 > N) continue;
        const double p = w.rate({a, b}, d) / gamma;
        P(k, a2 * (N + 1) + b2) += p;
        moved += p;
      }
      P(k, k) += 1.0 - moved;
    }
  return P;
}

}  // namespace

TEST(Oracle, ChainRowsAreStochastic) {
  const RandomWalk w = joint_departures_walk(0.2, 0.6, 0.18);
  const TruncatedChain c(25, w);
  EXPECT_LT(c.max_row_sum_error(), 1e-15);
  EXPECT_EQ(c.states(), 26 * 26);
  EXPECT_EQ(c.state(c.index({3, 7})), (State{3, 7}));
  EXPECT_TRUE(c.contains({25, 0}));
  EXPECT_FALSE(c.contains({26, 0}));
  EXPECT_THROW(TruncatedChain(5, w, 0.5), DomainError);
  EXPECT_THROW(TruncatedChain(-1, w), DomainError);
}

TEST(Oracle, ProductFormRecovered) {
  const double lambda = 0.2, mu = 0.6;
  const RandomWalk w = joint_departures_walk(lambda, mu, mu / 2.0);
  const double r = product_form_rho(lambda, mu);
  const int N = 60;
  const TruncatedChain c(N, w);
  const auto pi = stationary(c);
  double tv = 0.0;
  for (int k = 0; k < c.states(); ++k) {
    const State s = c.state(k);
    tv += std::abs(pi[k] - (1 - r) * (1 - r) * std::pow(r, s.n1 + s.n2));
  }
  EXPECT_LT(0.5 * tv, 1e-9);
  EXPECT_NEAR(oracle_expectation(c, pi, OriginIndicator{}), (1 - r) * (1 - r), 1e-10);
}

TEST(Oracle, IterativeAgreesWithDirect) {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 3; ++rep) {
    const RandomWalk w = fixtures::random_walk(rng);
    const TruncatedChain c(20, w);
    const auto a = stationary(c);
    const auto b = stationary(c, {StationaryMethod::Iterative, 500000, 1e-13});
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-10);
    EXPECT_LT(max_balance_residual(c, a), 1e-12);
    double mass = 0.0;
    for (double v : a) mass += v;
    EXPECT_NEAR(mass, 1.0, 1e-13);
  }
}

TEST(Oracle, SingleStateGrid) {
  const RandomWalk w = joint_departures_walk(0.2, 0.6, 0.18);
  const TruncatedChain c(0, w);
  EXPECT_EQ(stationary(c), std::vector<double>{1.0});
  const BiasTable t = value_iteration(c, OriginIndicator{}, 10);
  EXPECT_DOUBLE_EQ(t.final_values()[0], 10.0);
  EXPECT_DOUBLE_EQ(t.max_sup_abs(), 0.0);
}

TEST(Oracle, ValueIterationMatchesDenseRecursion) {
  std::mt19937_64 rng(42);
  const RandomWalk w = fixtures::random_walk(rng);
  const int N = 8, T = 60;
  const double gamma = w.gamma() * 1.3;
  const TruncatedChain c(N, w, gamma);
  const Reward reward = first_queue_length();
  ValueIterationOptions opt;
  opt.track_window = N;
  std::vector<std::vector<double>> seen;
  opt.observer = [&](int, const std::vector<double>& F) { seen.push_back(F); };
  const BiasTable t = value_iteration(c, reward, T, opt);

  const Eigen::MatrixXd P = dense_kernel(w, N, gamma);
  const int n = c.states();
  Eigen::VectorXd f(n), F = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) f[k] = reward_value(reward, c.state(k));
  std::vector<std::array<double, 9>> sup(static_cast<std::size_t>(n));
  for (auto& a : sup) a.fill(0.0);
  ASSERT_EQ(seen.size(), static_cast<std::size_t>(T + 1));
  for (int step = 1; step <= T; ++step) {
    F = f + P * F;
    for (int k = 0; k < n; ++k) EXPECT_NEAR(seen[step][k], F[k], 1e-11 * (1 + std::abs(F[k])));
    for (int k = 0; k < n; ++k) {
      const State s = c.state(k);
      for (const Direction d : neighborhood(s)) {
        const State to{s.n1 + d.i, s.n2 + d.j};
        if (!c.contains(to)) continue;
        sup[k][direction_slot(d)] =
            std::max(sup[k][direction_slot(d)], std::abs(F[c.index(to)] - F[k]) / gamma);
      }
    }
  }
  for (int k = 0; k < n; ++k) {
    const State s = c.state(k);
    ASSERT_TRUE(t.tracked(s));
    for (const Direction d : neighborhood(s))
      EXPECT_NEAR(t.sup_dir(s, d), sup[k][direction_slot(d)], 1e-11);
  }
}

TEST(Oracle, ZeroHorizonHasNoBias) {
  const RandomWalk w = joint_departures_walk(0.2, 0.6, 0.18);
  const TruncatedChain c(10, w);
  const BiasTable t = value_iteration(c, first_queue_length(), 0);
  EXPECT_DOUBLE_EQ(t.max_sup_abs(), 0.0);
  for (double v : t.final_values()) EXPECT_DOUBLE_EQ(v, 0.0);
  EXPECT_TRUE(t.tracked({10, 0}));
  EXPECT_FALSE(t.tracked({3, 3}));
  EXPECT_THROW(t.sup_abs({3, 3}), DomainError);
}

TEST(Oracle, CesaroApproachesStationaryReward) {
  const RandomWalk w = joint_departures_walk(0.2, 0.6, 0.18);
  const TruncatedChain c(30, w);
  const auto pi = stationary(c);
  const BiasTable t = value_iteration(c, OriginIndicator{}, 4000);
  EXPECT_NEAR(t.cesaro(), oracle_expectation(c, pi, OriginIndicator{}), 1e-8);
  EXPECT_TRUE(t.cesaro_converged());
}

TEST(Oracle, RejectsNegativeRewards) {
  const RandomWalk w = joint_departures_walk(0.2, 0.6, 0.18);
  const TruncatedChain c(5, w);
  const Reward neg = CustomReward{[](State s) { return -1.0 * s.n1; }, "neg"};
  EXPECT_THROW(value_iteration(c, neg, 5), DomainError);
}

TEST(Oracle, ConditionCheck) {
  const JointDeparturesConfig cfg{0.2, 0.6, 0.18};
  const RandomWalk base = joint_departures_walk(cfg.lambda, cfg.mu, cfg.mu_star);
  const RandomWalk hom = homogeneous_walk(cfg);
  const OracleRun run = run_oracle(base, OriginIndicator{}, 40, 400, 1.0);
  const auto orig = [&](State s, Direction d) { return base.rate(s, d); };
  const auto pert = [&](State s, Direction d) { return hom.rate(s, d); };
  const double B = 1.0 / cfg.mu_star;
  EXPECT_TRUE(check_conditions(run.bias, orig, pert, BiasBounds::constant(B, B, B), 20).holds);
  const ConditionCheck bad = check_conditions(run.bias, orig, pert, BiasBounds::constant(0, 0, 0), 20);
  EXPECT_FALSE(bad.holds);
  EXPECT_LT(bad.min_margin, 0.0);
  EXPECT_EQ(bad.window, 20);
}

TEST(Oracle, TruncationAllowanceShrinks) {
  const GeometricSum pi = normalize({{0.5887, 0.3802, 1.0}, {0.3802, 0.5887, 1.0}});
  const Reward n1 = first_queue_length();
  double prev = 1e300;
  for (int N : {10, 20, 40, 80}) {
    const double a = truncation_allowance(pi, n1, N, 1.0);
    EXPECT_GT(a, 0.0);
    EXPECT_LT(a, prev);
    prev = a;
  }
  EXPECT_NEAR(truncation_allowance(pi, OriginIndicator{}, 200, 0.3), 1e-9, 1e-12);
}

TEST(Oracle, BoundViolationThrows) {
  const JointDeparturesConfig cfg{0.2, 0.6, 0.18};
  const RandomWalk base = joint_departures_walk(cfg.lambda, cfg.mu, cfg.mu_star);
  const RandomWalk hom = homogeneous_walk(cfg);
  OracleOptions opt;
  opt.N = 40;
  opt.T = 200;
  try {
    verify_homogeneous(base, hom, homogeneous_pi(cfg), OriginIndicator{},
                       BiasBounds::constant(0, 0, 0), opt);
    FAIL() << "expected BoundViolated";
  } catch (const BoundViolated& e) {
    EXPECT_GT(e.margin(), 0.0);
  }
  opt.throw_on_violation = false;
  const auto rep = verify_homogeneous(base, hom, homogeneous_pi(cfg), OriginIndicator{},
                                      BiasBounds::constant(0, 0, 0), opt);
  EXPECT_FALSE(rep.passed);
}
