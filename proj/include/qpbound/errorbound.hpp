#pragma once

#include <string>
#include <vector>

#include "qpbound/geomsum.hpp"
#include "qpbound/model.hpp"
#include "qpbound/perturb.hpp"

namespace qpb {

/// Polynomial bounds on the bias terms:
///   |D^t_{i,j}(n1,0)| <= B1(n1) = sum_m b1[m] n1^m   on the horizontal axis,
///   |D^t_{i,j}(0,n2)| <= B2(n2) = sum_m b2[m] n2^m   on the vertical axis,
///   |D^t_{i,j}(0,0)|  <= b3                          at the origin.
/// Bias terms are measured in rate units, i.e. uniformized differences
/// divided by the uniformization constant.
struct BiasBounds {
  std::vector<double> b1{0.0};
  std::vector<double> b2{0.0};
  double b3 = 0.0;

  int degree() const { return static_cast<int>(b1.size()) - 1; }
  double B1(int n1) const;
  double B2(int n2) const;

  static BiasBounds constant(double B1, double B2, double B3);

  /// Throws DomainError unless both polynomials have the same degree, a
  /// non-negative leading coefficient, and are non-negative on n = 1..1000,
  /// and b3 >= 0.
  void validate() const;
};

struct RateDeltas {
  double h = 0.0;  ///< sum_i |h_bar_{i,1} - h_{i,1}|
  double v = 0.0;  ///< sum_j |v_bar_{1,j} - v_{1,j}|
  double r = 0.0;  ///< sum over N3 of |r_bar_{i,j} - r_{i,j}|
};

RateDeltas rate_deltas(const RandomWalk& base, const PerturbedWalk& walk);

struct ErrorBoundReport {
  RateDeltas deltas;
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
  double total = 0.0;
  std::string precondition_route;
};

/// Explicit error bound |F_bar - F| <= g1 + g2 + g3 for the inhomogeneous
/// perturbation. Throws ThresholdViolated when the perturbed axis rates do not
/// dominate the original ones.
ErrorBoundReport error_bound(const RandomWalk& base, const PerturbedWalk& walk,
                             const BiasBounds& bias);

/// Same bound written for constant bias bounds, without polylogarithms.
ErrorBoundReport error_bound_constant(const RandomWalk& base, const PerturbedWalk& walk, double B1,
                                      double B2, double B3);

/// The error bound is linear in the bias-bound coefficients. These are the
/// multipliers: total = <b1, mult.b1> + <b2, mult.b2> + b3 * mult.b3.
struct BoundCoefficients {
  std::vector<double> b1;
  std::vector<double> b2;
  double b3 = 0.0;

  double apply(const BiasBounds& bias) const;
};

BoundCoefficients bound_coefficients(const RandomWalk& base, const PerturbedWalk& walk, int degree);

/// Bound for a homogeneous perturbation `perturbed` of `base` whose
/// stationary distribution is `pi` (no threshold needed; absolute rate
/// differences are used directly).
ErrorBoundReport homogeneous_error_bound(const RandomWalk& base, const RandomWalk& perturbed,
                                         const GeometricSum& pi, const BiasBounds& bias);
BoundCoefficients homogeneous_bound_coefficients(const RandomWalk& base,
                                                 const RandomWalk& perturbed,
                                                 const GeometricSum& pi, int degree);

// ---------------------------------------------------------------------------
// Joint-departures closed forms.

/// rho = sigma of the product-form stationary distribution obtained by
/// setting both axis service rates to mu/2.
double product_form_rho(double lambda, double mu);

/// 2 rho (1 - rho) |mu/2 - mu*| (mu - mu*) / (mu mu*) for the empty-system
/// probability. Requires 0 < mu* < mu and 2 lambda + mu = 1.
double homogeneous_bound_joint_departures(double lambda, double mu, double mu_star);

/// The published bias-term constant max{1/mu*, (mu - mu*)/(mu mu*)} for the
/// empty-system reward.
double empty_system_bias_constant(double mu, double mu_star);

/// (mu - mu*)/(mu mu*), the constant embedded in the homogeneous closed form.
double empty_system_homogeneous_constant(double mu, double mu_star);

}  // namespace qpb
