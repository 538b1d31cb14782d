#pragma once

#include <string>
#include <vector>

#include "qpbound/geomsum.hpp"
#include "qpbound/model.hpp"

namespace qpb {

struct PerturbationParams {
  /// alpha_k = sum_i q_{i,1} - sum_i rho_k^{-i} sigma_k q_{i,-1}
  std::vector<double> alpha;
  /// beta_k = sum_j q_{1,j} - sum_j rho_k sigma_k^{-j} q_{-1,j}
  std::vector<double> beta;
  double h_bar_10 = 0.0;
  double v_bar_01 = 0.0;
};

/// Dominant geometric parameters that govern the limiting axis rates.
struct LimitParams {
  double rho_star = 0.0;     ///< max rho_k
  double sigma_star = 0.0;   ///< c-weighted mean of sigma_k over terms with rho_k = rho_star
  double rho_star2 = 0.0;    ///< c-weighted mean of rho_k over terms with sigma_k = sigma_star2
  double sigma_star2 = 0.0;  ///< max sigma_k
};

struct LimitRates {
  double h = 0.0;  ///< lim h_bar_{-1,0}(n1, 0)
  double v = 0.0;  ///< lim v_bar_{0,-1}(0, n2)
};

/// Perturbed walk whose stationary distribution is the given sum of
/// geometric terms. Interior rates and the rates from the axes into the
/// interior are copied from the base walk; h_bar_{1,0} and v_bar_{0,1} are
/// chosen constants; only h_bar_{-1,0}(n1,0) and v_bar_{0,-1}(0,n2) depend on
/// the state.
class PerturbedWalk {
 public:
  static constexpr int kRateWindow = 10000;

  const RandomWalk& base() const { return base_; }
  const GeometricSum& pi_bar() const { return pi_; }
  const PerturbationParams& params() const { return params_; }
  const LimitParams& limit_params() const { return limits_; }
  double gamma_bar() const { return gamma_bar_; }
  /// Non-fatal diagnostics gathered during construction.
  const std::vector<std::string>& warnings() const { return warnings_; }

  double rate(State s, Direction d) const;

  /// h_bar_{-1,0}(n1, 0) for n1 >= 1.
  double h_minus(int n1) const;
  /// v_bar_{0,-1}(0, n2) for n2 >= 1.
  double v_minus(int n2) const;

 private:
  friend PerturbedWalk build_perturbation(const RandomWalk&, const GeometricSum&, double, double);

  PerturbedWalk(RandomWalk base, GeometricSum pi) : base_(std::move(base)), pi_(std::move(pi)) {}

  RandomWalk base_;
  GeometricSum pi_;
  PerturbationParams params_;
  LimitParams limits_;
  double gamma_bar_ = 0.0;
  std::vector<std::string> warnings_;
};

std::vector<double> alpha_coefficients(const RandomWalk& base, const GeometricSum& pi);
std::vector<double> beta_coefficients(const RandomWalk& base, const GeometricSum& pi);
LimitParams limit_params(const GeometricSum& pi);

/// Builds the single-direction inhomogeneous perturbation.
/// Throws NotOnQ if a term misses the interior curve by 1e-10 or more, and
/// NegativeRate if a constructed rate is negative on n <= 10^4 or in the limit.
PerturbedWalk build_perturbation(const RandomWalk& base, const GeometricSum& pi, double h_bar_10,
                                 double v_bar_01);

LimitRates limit_rates(const PerturbedWalk& walk);

struct Thresholds {
  double h_min = 0.0;
  double v_min = 0.0;
};

/// Smallest h_bar_{1,0}, v_bar_{0,1} for which the sufficient condition
/// guarantees the perturbed axis rates dominate h_{-1,0}, v_{0,-1}.
/// Requires c_k > 0 for all k (throws NegativeCoefficient otherwise).
Thresholds thresholds(const RandomWalk& base, const GeometricSum& pi);

/// Uniform bound on the total outflow of the perturbed walk.
double gamma_bar(const PerturbedWalk& walk);

struct ThresholdCheck {
  bool holds = false;
  /// "sufficient-condition" when the closed-form thresholds certify it,
  /// "empirically verified" when only the window and limit check passed.
  std::string route;
  /// min over checked n of h_bar_{-1,0}(n) - h_{-1,0} and the vertical analogue.
  double min_margin = 0.0;
};

/// Checks h_bar_{-1,0}(n1) >= h_{-1,0} and v_bar_{0,-1}(n2) >= v_{0,-1} for all
/// n. Uses the closed-form thresholds first when all coefficients are
/// positive, otherwise falls back to the window n <= 10^4 plus the limit.
ThresholdCheck check_thresholds(const PerturbedWalk& walk);

}  // namespace qpb
