#include "qpbound/geomsum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qpbound/polylog.hpp"

namespace qpb {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kTie = 1e-12;

void check_term(const GeometricTerm& t) {
  if (!(t.rho > 0.0 && t.rho < 1.0 && t.sigma > 0.0 && t.sigma < 1.0))
    throw DomainError("geometric term needs (rho, sigma) in (0,1)^2");
  if (!std::isfinite(t.c)) throw DomainError("geometric term coefficient must be finite");
}

// Aggregated coefficient of the terms whose `key` equals the maximum.
template <typename Key>
double dominant_weight(const std::vector<GeometricTerm>& terms, Key key) {
  double top = 0.0;
  for (const auto& t : terms) top = std::max(top, key(t));
  double sum = 0.0;
  for (const auto& t : terms)
    if (std::abs(key(t) - top) <= kTie) sum += t.c;
  return sum;
}

}  // namespace

GeometricSum::GeometricSum(std::vector<GeometricTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw DomainError("a geometric sum needs at least one term");
  for (const auto& t : terms_) check_term(t);
  if (std::abs(total_mass() - 1.0) > kMassTolerance)
    throw DomainError("geometric sum is not normalized");

  if (dominant_weight(terms_, [](const GeometricTerm& t) { return t.rho; }) <= 0.0 ||
      dominant_weight(terms_, [](const GeometricTerm& t) { return t.sigma; }) <= 0.0)
    throw DomainError("dominant geometric terms have non-positive weight; measure turns negative");
  if (!all_coefficients_positive()) {
    for (int n1 = 0; n1 <= kPositivityWindow; ++n1)
      for (int n2 = 0; n2 <= kPositivityWindow; ++n2)
        if (!(evaluate({n1, n2}) > 0.0))
          throw DomainError("geometric sum is not positive at (" + std::to_string(n1) + "," +
                            std::to_string(n2) + ")");
  }
}

double GeometricSum::evaluate(State s) const {
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.c * std::pow(t.rho, s.n1) * std::pow(t.sigma, s.n2);
  return sum;
}

double GeometricSum::coefficient_sum() const {
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.c;
  return sum;
}

bool GeometricSum::all_coefficients_positive() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.c > 0.0; });
}

double GeometricSum::mass_of(const std::vector<GeometricTerm>& terms) {
  double mass = 0.0;
  for (const auto& t : terms) mass += t.c / ((1.0 - t.rho) * (1.0 - t.sigma));
  return mass;
}

GeometricSum normalize(std::vector<GeometricTerm> terms) {
  for (const auto& t : terms) check_term(t);
  const double mass = GeometricSum::mass_of(terms);
  if (!(mass > 0.0)) throw DegenerateMass("unnormalized geometric sum has non-positive mass");
  for (auto& t : terms) t.c /= mass;
  return GeometricSum(std::move(terms));
}

Reward first_queue_length() { return Polynomial{{Monomial{1, 0, 1.0}}}; }

double reward_value(const Reward& reward, State s) {
  return std::visit(
      [&](const auto& r) -> double {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, OriginIndicator>) {
          return s.n1 == 0 && s.n2 == 0 ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<R, Polynomial>) {
          double v = 0.0;
          for (const auto& m : r.terms) v += m.coeff * std::pow(s.n1, m.a) * std::pow(s.n2, m.b);
          return v;
        } else {
          return r.f(s);
        }
      },
      reward);
}

std::string reward_name(const Reward& reward) {
  return std::visit(
      [](const auto& r) -> std::string {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, OriginIndicator>) {
          return "empty";
        } else if constexpr (std::is_same_v<R, Polynomial>) {
          std::ostringstream os;
          for (std::size_t k = 0; k < r.terms.size(); ++k) {
            if (k) os << "+";
            os << r.terms[k].coeff << "*n1^" << r.terms[k].a << "*n2^" << r.terms[k].b;
          }
          return os.str();
        } else {
          return r.name;
        }
      },
      reward);
}

double expected_reward(const GeometricSum& pi, const Reward& reward) {
  if (std::holds_alternative<OriginIndicator>(reward)) return pi.coefficient_sum();
  if (const auto* poly = std::get_if<Polynomial>(&reward)) {
    double total = 0.0;
    for (const auto& m : poly->terms) {
      if (m.a < 0 || m.b < 0) throw UnsupportedReward("negative monomial exponent");
      for (const auto& t : pi.terms())
        total += m.coeff * t.c * power_series(m.a, t.rho) * power_series(m.b, t.sigma);
    }
    return total;
  }
  throw UnsupportedReward("no closed form for reward '" + reward_name(reward) + "'");
}

double reward_tail_outside(const GeometricSum& pi, const Reward& reward, int N) {
  if (std::holds_alternative<OriginIndicator>(reward)) return 0.0;
  const auto* poly = std::get_if<Polynomial>(&reward);
  if (!poly) throw UnsupportedReward("no closed-form tail for reward '" + reward_name(reward) + "'");
  // Outside [0,N]^2 = {n1 > N} u ({n1 <= N} x {n2 > N}).
  double tail = 0.0;
  for (const auto& m : poly->terms) {
    for (const auto& t : pi.terms()) {
      const double tail1 = power_series_tail(m.a, t.rho, N);
      const double head1 = std::max(0.0, power_series(m.a, t.rho) - tail1);
      const double part = tail1 * power_series(m.b, t.sigma) +
                          head1 * power_series_tail(m.b, t.sigma, N);
      tail += std::abs(m.coeff * t.c) * part;
    }
  }
  return tail;
}

}  // namespace qpb
