#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qpbound/biaslp.hpp"
#include "qpbound/experiments.hpp"
#include "qpbound/polylog.hpp"
#include "lp_checks.hpp"

using namespace qpb;
using namespace qpb::fixtures;

namespace {

BiasLpProblem synthetic(std::mt19937_64& rng, int degree, int window) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BiasLpProblem p;
  p.degree = degree;
  p.window = window;
  // Objective weights are moments of a geometric weight on the axis, as in
  // the error bound.
  const double r1 = 0.2 + 0.6 * u(rng), r2 = 0.2 + 0.6 * u(rng);
  const double s1 = 0.5 + u(rng), s2 = 0.5 + u(rng);
  for (int m = 0; m <= degree; ++m) {
    p.objective.b1.push_back(s1 * polylog_neg(m, r1));
    p.objective.b2.push_back(s2 * polylog_neg(m, r2));
  }
  p.objective.b3 = 0.5 + u(rng);
  const double slope1 = 5.0 * u(rng), slope2 = 5.0 * u(rng);
  for (int n = 1; n <= window; ++n) {
    p.d1.push_back(2.0 + slope1 * n + 3.0 * u(rng) + 4.0 * std::sin(0.3 * n));
    p.d2.push_back(1.0 + slope2 * std::sqrt(n) + 2.0 * u(rng));
  }
  p.d0 = 1.0 + u(rng);
  return p;
}

}  // namespace

TEST(BiasLp, DegreeZeroIsComponentwiseMaximum) {
  std::mt19937_64 rng(61);
  for (int rep = 0; rep < 20; ++rep) {
    const BiasLpProblem p = synthetic(rng, 0, 10 + rep);
    const BiasLpSolution s = solve(p);
    EXPECT_EQ(s.bounds.b1[0], *std::max_element(p.d1.begin(), p.d1.end()));
    EXPECT_EQ(s.bounds.b2[0], *std::max_element(p.d2.begin(), p.d2.end()));
    EXPECT_EQ(s.bounds.b3, p.d0);
    EXPECT_EQ(s.cs_residual, 0.0);
  }
}

TEST(BiasLp, SolutionsAreFeasibleAndLocallyOptimal) {
  std::mt19937_64 rng(62);
  for (int degree = 1; degree <= 3; ++degree) {
    const BiasLpProblem p = synthetic(rng, degree, 60);
    const BiasLpSolution s = solve(p);
    EXPECT_LT(s.cs_residual, 1e-9);
    EXPECT_TRUE(feasible(p, s.bounds, 1e-9));
    EXPECT_NEAR(s.objective, p.objective.apply(s.bounds), 1e-12 * std::max(1.0, s.objective));
    bool all_feasible = false;
    const double gain = worst_perturbation_gain(p, s, rng, 1000, all_feasible);
    EXPECT_TRUE(all_feasible);
    EXPECT_GE(gain, -1e-9 * std::max(1.0, s.objective));
  }
}

TEST(BiasLp, LargerWindowNeverLowersObjective) {
  std::mt19937_64 rng(63);
  for (int degree = 0; degree <= 2; ++degree) {
    const BiasLpProblem full = synthetic(rng, degree, 80);
    double prev = -1.0;
    for (int w : {10, 20, 40, 80}) {
      BiasLpProblem p = full;
      p.window = w;
      p.d1.resize(w);
      p.d2.resize(w);
      const double obj = solve(p).objective;
      EXPECT_GE(obj, prev - 1e-9 * std::max(1.0, obj)) << degree << ' ' << w;
      prev = obj;
    }
  }
}

TEST(BiasLp, AssembleFromOracle) {
  const JointDeparturesConfig cfg{0.2, 0.6, 0.18};
  const RandomWalk base = joint_departures_walk(cfg.lambda, cfg.mu, cfg.mu_star);
  const InhomogeneousSetup setup = inhomogeneous_perturbation(cfg);
  const OracleRun run = run_oracle(base, first_queue_length(), 40, 400,
                                   std::max(base.gamma(), setup.walk.gamma_bar()));
  const BiasLpProblem p = assemble(base, setup.walk, run.bias, 1, 15);
  ASSERT_EQ(p.d1.size(), 15u);
  for (int n = 1; n <= 15; ++n) {
    EXPECT_EQ(p.d1[n - 1], run.bias.sup_abs({n, 0}));
    EXPECT_EQ(p.d2[n - 1], run.bias.sup_abs({0, n}));
  }
  EXPECT_EQ(p.d0, run.bias.sup_abs({0, 0}));
  const BiasLpSolution s = solve(p);
  EXPECT_LT(s.cs_residual, 1e-9);
  EXPECT_TRUE(feasible(p, s.bounds, 1e-9));
  EXPECT_NO_THROW(s.bounds.validate());
  EXPECT_EQ(s.label, "empirically certified");

  EXPECT_THROW(assemble(base, setup.walk, run.bias, 1, 40), DomainError);
  EXPECT_THROW(assemble(base, setup.walk, run.bias, 1, 0), DomainError);
  BoundCoefficients negative = bound_coefficients(base, setup.walk, 1);
  negative.b1[1] = -1.0;
  EXPECT_THROW(assemble(negative, run.bias, 1, 15), IllPosed);
}
