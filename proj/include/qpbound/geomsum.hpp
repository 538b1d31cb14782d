#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "qpbound/model.hpp"

namespace qpb {

/// One term c * rho^n1 * sigma^n2 of a sum of geometric terms.
struct GeometricTerm {
  double rho = 0.5;
  double sigma = 0.5;
  double c = 1.0;
};

/// Probability measure pi(n1, n2) = sum_k c_k rho_k^n1 sigma_k^n2.
///
/// Construction enforces normalization (total mass 1 within 1e-12) and
/// positivity. Positivity is checked on the window [0, kPositivityWindow]^2
/// together with a tail criterion: the terms carrying the largest rho (resp.
/// sigma) must have a positive aggregated coefficient. With negative
/// coefficients this is a heuristic, not a proof.
class GeometricSum {
 public:
  static constexpr int kPositivityWindow = 200;

  explicit GeometricSum(std::vector<GeometricTerm> terms);

  const std::vector<GeometricTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  double operator()(State s) const { return evaluate(s); }
  double evaluate(State s) const;

  /// sum_k c_k / ((1 - rho_k)(1 - sigma_k)); one for a valid sum.
  double total_mass() const { return mass_of(terms_); }
  double coefficient_sum() const;
  bool all_coefficients_positive() const;

  static double mass_of(const std::vector<GeometricTerm>& terms);

 private:
  std::vector<GeometricTerm> terms_;
};

/// Rescales all coefficients by one common factor to unit mass.
/// Throws DegenerateMass when the unnormalized mass is not positive.
GeometricSum normalize(std::vector<GeometricTerm> terms);

// ---------------------------------------------------------------------------
// Reward functions.

/// 1{(n1, n2) = (0, 0)}: the probability of an empty system.
struct OriginIndicator {};

/// coeff * n1^a * n2^b
struct Monomial {
  int a = 0;
  int b = 0;
  double coeff = 1.0;
};

struct Polynomial {
  std::vector<Monomial> terms;
};

/// Arbitrary reward; usable by the oracle but without a closed form.
struct CustomReward {
  std::function<double(State)> f;
  std::string name;
};

using Reward = std::variant<OriginIndicator, Polynomial, CustomReward>;

/// F(n1, n2) = n1, the number of jobs in the first queue.
Reward first_queue_length();

double reward_value(const Reward& reward, State s);
std::string reward_name(const Reward& reward);

/// Closed-form sum_s pi(s) F(s). Throws UnsupportedReward for CustomReward.
double expected_reward(const GeometricSum& pi, const Reward& reward);

/// Upper bound on sum over states outside [0, N]^2 of |pi(s)| * |F(s)|.
/// Closed form for the indicator and polynomial rewards.
double reward_tail_outside(const GeometricSum& pi, const Reward& reward, int N);

}  // namespace qpb
