#include "qpbound/errorbound.hpp"

#include <algorithm>
#include <cmath>

#include "qpbound/polylog.hpp"

namespace qpb {

namespace {

constexpr int kValidationWindow = 1000;

double poly_at(const std::vector<double>& b, int n) {
  double v = 0.0;
  for (auto it = b.rbegin(); it != b.rend(); ++it) v = v * n + *it;
  return v;
}

void require_threshold(const PerturbedWalk& walk, std::string& route) {
  const ThresholdCheck check = check_thresholds(walk);
  if (!check.holds)
    throw ThresholdViolated("perturbed axis rates fall below the original ones (margin " +
                            std::to_string(check.min_margin) + ")");
  route = check.route;
}

// Multipliers of b_{1,m} (axis = horizontal) or b_{2,m} (vertical):
//   (delta + |bar_out - out| - down) sum_k c_k Li_{-m}(z_k)
//   + bar_out sum_k c_k z_k^{-1} Li_{-m}(z_k)
//   - sum_k c_k w_k (1 - z_k)^{-1} Li_{-m}(z_k)
struct AxisInputs {
  double delta;
  double bar_out;
  double out;
  double down;
};

template <typename Z>
std::vector<double> axis_multipliers(const GeometricSum& pi, const std::vector<double>& w,
                                     const AxisInputs& in, Z z_of, int degree) {
  std::vector<double> mult(static_cast<std::size_t>(degree + 1), 0.0);
  const double lead = in.delta + std::abs(in.bar_out - in.out) - in.down;
  for (int m = 0; m <= degree; ++m) {
    double s_plain = 0.0, s_shift = 0.0, s_drift = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) {
      const auto& t = pi.terms()[k];
      const double z = z_of(t);
      const double li = polylog_neg(m, z);
      s_plain += t.c * li;
      s_shift += t.c * li / z;
      s_drift += t.c * w[k] * li / (1.0 - z);
    }
    mult[static_cast<std::size_t>(m)] = lead * s_plain + in.bar_out * s_shift - s_drift;
  }
  return mult;
}

AxisInputs horizontal_inputs(const RandomWalk& base, const PerturbedWalk& walk,
                             const RateDeltas& d) {
  return {d.h, walk.params().h_bar_10, base.horizontal()(1, 0), base.horizontal()(-1, 0)};
}

AxisInputs vertical_inputs(const RandomWalk& base, const PerturbedWalk& walk,
                           const RateDeltas& d) {
  return {d.v, walk.params().v_bar_01, base.vertical()(0, 1), base.vertical()(0, -1)};
}

double rho_of(const GeometricTerm& t) { return t.rho; }
double sigma_of(const GeometricTerm& t) { return t.sigma; }

double sum_abs_diff(const RandomWalk& a, const RandomWalk& b, Component c) {
  double s = 0.0;
  for (const Direction d : neighborhood(c)) s += std::abs(a.table(c)(d) - b.table(c)(d));
  return s;
}

}  // namespace

double BiasBounds::B1(int n1) const { return poly_at(b1, n1); }
double BiasBounds::B2(int n2) const { return poly_at(b2, n2); }

BiasBounds BiasBounds::constant(double B1, double B2, double B3) {
  return BiasBounds{{B1}, {B2}, B3};
}

void BiasBounds::validate() const {
  if (b1.empty() || b1.size() != b2.size())
    throw DomainError("bias bounds need equal, non-empty coefficient lists");
  if (!(b3 >= 0.0)) throw DomainError("B3 must be non-negative");
  if (b1.back() < 0.0 || b2.back() < 0.0)
    throw DomainError("bias bound polynomials need a non-negative leading coefficient");
  for (int n = 1; n <= kValidationWindow; ++n)
    if (B1(n) < -1e-10 || B2(n) < -1e-10)
      throw DomainError("bias bound polynomial negative at n = " + std::to_string(n));
}

RateDeltas rate_deltas(const RandomWalk& base, const PerturbedWalk& walk) {
  RateDeltas d;
  const State axis_h{1, 0}, axis_v{0, 1}, origin{0, 0};
  for (int i = -1; i <= 1; ++i)
    d.h += std::abs(walk.rate(axis_h, {i, 1}) - base.horizontal()(i, 1));
  for (int j = -1; j <= 1; ++j)
    d.v += std::abs(walk.rate(axis_v, {1, j}) - base.vertical()(1, j));
  for (const Direction dir : neighborhood(Component::Origin))
    d.r += std::abs(walk.rate(origin, dir) - base.origin()(dir));
  return d;
}

ErrorBoundReport error_bound(const RandomWalk& base, const PerturbedWalk& walk,
                             const BiasBounds& bias) {
  bias.validate();
  ErrorBoundReport rep;
  require_threshold(walk, rep.precondition_route);
  rep.deltas = rate_deltas(base, walk);

  const GeometricSum& pi = walk.pi_bar();
  const auto& alpha = walk.params().alpha;
  const auto& beta = walk.params().beta;
  const double h_bar = walk.params().h_bar_10;
  const double v_bar = walk.params().v_bar_01;
  const double h_lead = rep.deltas.h + std::abs(h_bar - base.horizontal()(1, 0)) -
                        base.horizontal()(-1, 0);
  const double v_lead = rep.deltas.v + std::abs(v_bar - base.vertical()(0, 1)) -
                        base.vertical()(0, -1);

  double h_plain = 0.0, h_shift = 0.0, h_drift = 0.0;
  double v_plain = 0.0, v_shift = 0.0, v_drift = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const auto& t = pi.terms()[k];
    for (int m = 0; m <= bias.degree(); ++m) {
      const double li_r = polylog_neg(m, t.rho);
      const double li_s = polylog_neg(m, t.sigma);
      const double b1 = bias.b1[static_cast<std::size_t>(m)];
      const double b2 = bias.b2[static_cast<std::size_t>(m)];
      h_plain += t.c * b1 * li_r;
      h_shift += t.c / t.rho * b1 * li_r;
      h_drift += t.c * alpha[k] * b1 / (1.0 - t.rho) * li_r;
      v_plain += t.c * b2 * li_s;
      v_shift += t.c / t.sigma * b2 * li_s;
      v_drift += t.c * beta[k] * b2 / (1.0 - t.sigma) * li_s;
    }
  }
  rep.g1 = h_lead * h_plain + h_bar * h_shift - h_drift;
  rep.g2 = v_lead * v_plain + v_bar * v_shift - v_drift;
  rep.g3 = rep.deltas.r * bias.b3 * pi.coefficient_sum();
  rep.total = rep.g1 + rep.g2 + rep.g3;
  return rep;
}

ErrorBoundReport error_bound_constant(const RandomWalk& base, const PerturbedWalk& walk, double B1,
                                      double B2, double B3) {
  BiasBounds::constant(B1, B2, B3).validate();
  ErrorBoundReport rep;
  require_threshold(walk, rep.precondition_route);
  rep.deltas = rate_deltas(base, walk);

  const GeometricSum& pi = walk.pi_bar();
  const auto& alpha = walk.params().alpha;
  const auto& beta = walk.params().beta;
  const double h_bar = walk.params().h_bar_10;
  const double v_bar = walk.params().v_bar_01;

  double h1 = 0.0, h2 = 0.0, h3 = 0.0, v1 = 0.0, v2 = 0.0, v3 = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const auto& t = pi.terms()[k];
    const double one_r = 1.0 - t.rho, one_s = 1.0 - t.sigma;
    h1 += t.c * t.rho / one_r;
    h2 += t.c / one_r;
    h3 += t.c * alpha[k] * t.rho / (one_r * one_r);
    v1 += t.c * t.sigma / one_s;
    v2 += t.c / one_s;
    v3 += t.c * beta[k] * t.sigma / (one_s * one_s);
  }
  rep.g1 = (rep.deltas.h + std::abs(h_bar - base.horizontal()(1, 0)) - base.horizontal()(-1, 0)) *
               B1 * h1 +
           h_bar * B1 * h2 - B1 * h3;
  rep.g2 = (rep.deltas.v + std::abs(v_bar - base.vertical()(0, 1)) - base.vertical()(0, -1)) *
               B2 * v1 +
           v_bar * B2 * v2 - B2 * v3;
  rep.g3 = rep.deltas.r * B3 * pi.coefficient_sum();
  rep.total = rep.g1 + rep.g2 + rep.g3;
  return rep;
}

double BoundCoefficients::apply(const BiasBounds& bias) const {
  if (bias.b1.size() != b1.size() || bias.b2.size() != b2.size())
    throw DomainError("bias bound degree does not match the coefficient layout");
  double total = b3 * bias.b3;
  for (std::size_t m = 0; m < b1.size(); ++m) total += b1[m] * bias.b1[m] + b2[m] * bias.b2[m];
  return total;
}

BoundCoefficients bound_coefficients(const RandomWalk& base, const PerturbedWalk& walk,
                                     int degree) {
  if (degree < 0) throw DomainError("bias bound degree must be non-negative");
  std::string route;
  require_threshold(walk, route);
  const RateDeltas d = rate_deltas(base, walk);
  const GeometricSum& pi = walk.pi_bar();
  BoundCoefficients out;
  out.b1 = axis_multipliers(pi, walk.params().alpha, horizontal_inputs(base, walk, d), rho_of,
                            degree);
  out.b2 = axis_multipliers(pi, walk.params().beta, vertical_inputs(base, walk, d), sigma_of,
                            degree);
  out.b3 = d.r * pi.coefficient_sum();
  return out;
}

BoundCoefficients homogeneous_bound_coefficients(const RandomWalk& base,
                                                 const RandomWalk& perturbed,
                                                 const GeometricSum& pi, int degree) {
  if (degree < 0) throw DomainError("bias bound degree must be non-negative");
  const double dh = sum_abs_diff(base, perturbed, Component::Horizontal);
  const double dv = sum_abs_diff(base, perturbed, Component::Vertical);
  const double dr = sum_abs_diff(base, perturbed, Component::Origin);
  BoundCoefficients out;
  for (int m = 0; m <= degree; ++m) {
    double sh = 0.0, sv = 0.0;
    for (const auto& t : pi.terms()) {
      sh += t.c * polylog_neg(m, t.rho);
      sv += t.c * polylog_neg(m, t.sigma);
    }
    out.b1.push_back(dh * sh);
    out.b2.push_back(dv * sv);
  }
  out.b3 = dr * pi.coefficient_sum();
  return out;
}

ErrorBoundReport homogeneous_error_bound(const RandomWalk& base, const RandomWalk& perturbed,
                                         const GeometricSum& pi, const BiasBounds& bias) {
  bias.validate();
  const BoundCoefficients mult = homogeneous_bound_coefficients(base, perturbed, pi, bias.degree());
  ErrorBoundReport rep;
  rep.precondition_route = "homogeneous";
  rep.deltas = {sum_abs_diff(base, perturbed, Component::Horizontal),
                sum_abs_diff(base, perturbed, Component::Vertical),
                sum_abs_diff(base, perturbed, Component::Origin)};
  for (std::size_t m = 0; m < bias.b1.size(); ++m) {
    rep.g1 += mult.b1[m] * bias.b1[m];
    rep.g2 += mult.b2[m] * bias.b2[m];
  }
  rep.g3 = mult.b3 * bias.b3;
  rep.total = rep.g1 + rep.g2 + rep.g3;
  return rep;
}

double product_form_rho(double lambda, double mu) {
  if (!(lambda > 0.0 && mu > 0.0)) throw DomainError("product_form_rho needs positive rates");
  return (-mu + std::sqrt(mu * mu + 8.0 * lambda * mu)) / (2.0 * mu);
}

double homogeneous_bound_joint_departures(double lambda, double mu, double mu_star) {
  if (!(lambda > 0.0 && mu_star > 0.0 && mu_star < mu))
    throw DomainError("homogeneous bound needs lambda > 0 and 0 < mu* < mu");
  if (std::abs(2.0 * lambda + mu - 1.0) > 1e-12)
    throw DomainError("homogeneous bound needs 2 lambda + mu = 1");
  const double rho = product_form_rho(lambda, mu);
  return 2.0 * rho * (1.0 - rho) * std::abs(mu / 2.0 - mu_star) * (mu - mu_star) / (mu * mu_star);
}

double empty_system_bias_constant(double mu, double mu_star) {
  return std::max(1.0 / mu_star, (mu - mu_star) / (mu * mu_star));
}

double empty_system_homogeneous_constant(double mu, double mu_star) {
  return (mu - mu_star) / (mu * mu_star);
}

}  // namespace qpb
