#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qpbound/experiments.hpp"

using namespace qpb;

namespace {

int count_lines(const std::filesystem::path& p) {
  std::ifstream f(p);
  int n = 0;
  for (std::string line; std::getline(f, line);) ++n;
  return n;
}

SweepOptions small(SweepMode mode, RewardKind reward) {
  SweepOptions o;
  o.mode = mode;
  o.reward = reward;
  o.N = 60;
  o.T = 600;
  o.constraint_window = 25;
  return o;
}

}  // namespace

TEST(Experiments, ConfigValidation) {
  EXPECT_TRUE((JointDeparturesConfig{0.2, 0.6, 0.18}.valid()));
  EXPECT_FALSE((JointDeparturesConfig{0.2, 0.5, 0.18}.valid()));
  EXPECT_FALSE((JointDeparturesConfig{0.2, 0.6, 0.6}.valid()));
  EXPECT_FALSE((JointDeparturesConfig{0.2, 0.6, 0.0}.valid()));
  const auto c = JointDeparturesConfig::from_load(0.25, 0.3);
  EXPECT_NEAR(2 * c.lambda + c.mu, 1.0, 1e-15);
  EXPECT_NEAR(c.lambda / c.mu, 0.25, 1e-15);
  EXPECT_NEAR(c.eta(), 0.3, 1e-15);
  EXPECT_NEAR(JointDeparturesConfig::from_eta(0.2, 0.6, 0.5).mu_star, 0.3, 1e-15);
}

TEST(Experiments, MarkedPointsAndCurves) {
  const JointDeparturesConfig cfg{0.2, 0.6, 0.18};
  const auto pts = marked_points(cfg);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0].label, "Q_cap_H");
  EXPECT_EQ(pts[2].label, "product_form");
  const auto dir = std::filesystem::temp_directory_path() / "qpbound_curves_test";
  std::filesystem::remove_all(dir);
  run_curves(cfg, dir.string(), 50);
  for (const char* f : {"allcurves_data_int.csv", "allcurves_data_hor.csv", "allcurves_data_ver.csv",
                        "allcurves_data_prod_hor.csv", "allcurves_data_prod_ver.csv"})
    EXPECT_GT(count_lines(dir / f), 10) << f;
  EXPECT_EQ(count_lines(dir / "marked_points.csv"), 4);

  const RandomWalk w = joint_departures_walk(cfg.lambda, cfg.mu, cfg.mu_star);
  for (const auto& s : sample_Q(w, 100)) {
    if (!std::isnan(s.branch1)) EXPECT_NEAR(curve_residual_Q(w, s.rho, s.branch1), 0.0, 1e-10);
    if (!std::isnan(s.branch2)) EXPECT_NEAR(curve_residual_Q(w, s.rho, s.branch2), 0.0, 1e-10);
  }
  for (const auto& s : sample_boundary_curve(Curve::H, w, 100))
    if (!std::isnan(s.sigma)) EXPECT_NEAR(curve_residual_H(w, s.rho, s.sigma), 0.0, 1e-12);
  for (const auto& s : sample_boundary_curve(Curve::V, w, 100))
    EXPECT_NEAR(curve_residual_V(w, s.rho, s.sigma), 0.0, 1e-12);
}

TEST(Experiments, PerturbationSetups) {
  const JointDeparturesConfig cfg{0.2, 0.6, 0.18};
  const GeometricSum pi = two_term_pi(cfg);
  EXPECT_NEAR(pi.total_mass(), 1.0, 1e-12);
  EXPECT_NEAR(pi.terms()[0].c, pi.terms()[1].c, 1e-15);
  const auto ok = inhomogeneous_perturbation(cfg);
  EXPECT_EQ(ok.status, "ok");
  EXPECT_DOUBLE_EQ(ok.walk.params().h_bar_10, 0.2);
  const auto raised = inhomogeneous_perturbation(JointDeparturesConfig::from_eta(0.2, 0.6, 0.8));
  EXPECT_EQ(raised.status, "threshold_raised");
  EXPECT_GT(raised.walk.params().h_bar_10, 0.2);
  EXPECT_TRUE(check_thresholds(raised.walk).holds);
  const double r = product_form_rho(cfg.lambda, cfg.mu);
  EXPECT_NEAR(homogeneous_pi(cfg)({0, 0}), (1 - r) * (1 - r), 1e-15);
}

TEST(Experiments, SweepRowsVerifyAndCrossOver) {
  SweepOptions o = small(SweepMode::Eta, RewardKind::Empty);
  o.grid = {0.35, 0.5, 0.7};
  const auto rows = run_sweep(o);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.bound_ok) << r.x << ' ' << r.status;
    EXPECT_EQ(r.index, &r - rows.data());
  }
  EXPECT_LT(rows[0].bound_inhom, rows[0].bound_hom);
  EXPECT_NEAR(rows[1].bound_hom, 0.0, 1e-12);
  EXPECT_NEAR(rows[1].bound_inhom, 0.0, 1e-12);
  EXPECT_GT(rows[2].bound_inhom, rows[2].bound_hom);
  EXPECT_EQ(rows[2].status, "threshold_raised");
}

TEST(Experiments, SweepIsDeterministicAcrossThreadCounts) {
  SweepOptions o = small(SweepMode::Load, RewardKind::N1);
  o.grid = {0.1, 0.2, 0.3, 0.45};
  o.threads = 1;
  const auto a = run_sweep(o);
  o.threads = 4;
  const auto b = run_sweep(o);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(sweep_csv_row(a[k]), sweep_csv_row(b[k]));
  EXPECT_EQ(a[3].status, "paper_infeasible_regime");
  EXPECT_TRUE(a[0].bound_ok);
}

TEST(Experiments, InvalidPointsAreRecorded) {
  SweepOptions o = small(SweepMode::Eta, RewardKind::Empty);
  const SweepRow r = evaluate_point(1.2, 0, o);
  EXPECT_EQ(r.status, "invalid_config");
  EXPECT_FALSE(r.verified);
  const std::string line = sweep_csv_row(r), header = sweep_csv_header();
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), std::count(header.begin(), header.end(), ','));
}

TEST(Experiments, DefaultGrids) {
  const auto eta = default_grid(SweepMode::Eta);
  EXPECT_EQ(eta.size(), 13u);
  EXPECT_NEAR(eta.front(), 0.35, 1e-15);
  EXPECT_NEAR(eta.back(), 0.95, 1e-15);
  bool has_half = false;
  for (double x : eta) has_half = has_half || std::abs(x - 0.5) < 1e-15;
  EXPECT_TRUE(has_half);
  EXPECT_EQ(default_grid(SweepMode::Load).size(), 8u);
}
