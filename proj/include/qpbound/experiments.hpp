#pragma once

#include <string>
#include <vector>

#include "qpbound/biaslp.hpp"
#include "qpbound/errorbound.hpp"
#include "qpbound/geomsum.hpp"
#include "qpbound/model.hpp"
#include "qpbound/oracle.hpp"
#include "qpbound/perturb.hpp"

namespace qpb {

/// Two queues with arrival rate lambda each, joint service rate mu and
/// degraded rate mu_star on the axes.
struct JointDeparturesConfig {
  double lambda = 0.2;
  double mu = 0.6;
  double mu_star = 0.18;

  double eta() const { return mu_star / mu; }
  /// Throws DomainError unless 2 lambda + mu = 1 and 0 < mu_star < mu.
  /// lambda < mu_star is not required; the reference case mu_star = 0.18 at
  /// lambda = 0.2 lies outside it.
  void validate() const;
  bool valid() const;

  static JointDeparturesConfig from_eta(double lambda, double mu, double eta);
  /// lambda / mu = load with 2 lambda + mu = 1 and mu_star = eta * mu.
  static JointDeparturesConfig from_load(double load, double eta = 0.3);
};

// ---------------------------------------------------------------------------
// Curves.

struct CurveSample {
  double rho = 0.0;
  double sigma = 0.0;  ///< NaN when the curve has no point at this rho
};

struct QCurveSample {
  double rho = 0.0;
  double branch1 = 0.0;  ///< smaller root in (0,1) or NaN
  double branch2 = 0.0;  ///< larger root in (0,1) or NaN
};

/// Q sampled on a rho grid of `samples` points in (0,1).
std::vector<QCurveSample> sample_Q(const RandomWalk& walk, int samples);
/// H (or V) sampled on a rho grid; H is linear in sigma and V in rho, so
/// each grid value carries at most one point.
std::vector<CurveSample> sample_boundary_curve(Curve curve, const RandomWalk& walk, int samples);

struct MarkedPoint {
  std::string label;
  double rho = 0.0;
  double sigma = 0.0;
};

/// Q intersections used by the inhomogeneous perturbation, and the
/// product-form point of the homogeneous one.
std::vector<MarkedPoint> marked_points(const JointDeparturesConfig& cfg);

/// Writes allcurves_data_int.csv, allcurves_data_hor.csv,
/// allcurves_data_ver.csv, allcurves_data_prod_hor.csv,
/// allcurves_data_prod_ver.csv and marked_points.csv into out_dir.
std::vector<MarkedPoint> run_curves(const JointDeparturesConfig& cfg, const std::string& out_dir,
                                    int samples = 400);

// ---------------------------------------------------------------------------
// Perturbations of the joint-departures model.

/// Product-form walk with both axis service rates mu/2.
RandomWalk homogeneous_walk(const JointDeparturesConfig& cfg);
GeometricSum homogeneous_pi(const JointDeparturesConfig& cfg);

/// Two-term measure from Q cap H and Q cap V with equal weights.
GeometricSum two_term_pi(const JointDeparturesConfig& cfg);

struct InhomogeneousSetup {
  PerturbedWalk walk;
  /// "ok", or "threshold_raised" when h_bar_10 = lambda left the axis rates
  /// below the original ones and the closed-form thresholds were used.
  std::string status;
};

InhomogeneousSetup inhomogeneous_perturbation(const JointDeparturesConfig& cfg);

// ---------------------------------------------------------------------------
// Sweeps.

enum class SweepMode { Load, Eta };
enum class RewardKind { Empty, N1 };

Reward make_reward(RewardKind kind);

struct SweepOptions {
  SweepMode mode = SweepMode::Eta;
  RewardKind reward = RewardKind::Empty;
  int N = 200;
  int T = 5000;
  /// Degree of the LP bias bounds for the queue-length reward.
  int bias_degree = 1;
  int constraint_window = 100;
  /// 0 uses the hardware concurrency.
  int threads = 0;
  /// Empty selects the default grid of the mode.
  std::vector<double> grid;
};

std::vector<double> default_grid(SweepMode mode);

struct SweepRow {
  int index = 0;
  double x = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double mu_star = 0.0;
  double bound_inhom = 0.0;
  /// Homogeneous bound with the same bias bounds as bound_inhom.
  double bound_hom = 0.0;
  /// Closed-form homogeneous bound for the empty-system reward.
  double bound_hom_closed = 0.0;
  double F_bar = 0.0;
  double F_bar_hom = 0.0;
  double F_oracle = 0.0;
  double allowance = 0.0;
  double h_bar_10 = 0.0;
  double margin_inhom = 0.0;
  double margin_hom = 0.0;
  bool conditions_inhom = false;
  bool conditions_hom = false;
  bool bound_ok = true;
  bool verified = false;
  std::string status = "ok";
};

/// Evaluates one grid point. Never throws for model-level failures; they are
/// recorded in the row status.
SweepRow evaluate_point(double x, int index, const SweepOptions& options);

/// Grid points run concurrently; rows come back in grid order.
std::vector<SweepRow> run_sweep(const SweepOptions& options);

std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& row);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace qpb
