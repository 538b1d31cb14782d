#include "qpbound/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qpb {

namespace {

constexpr double kOnQ = 1e-10;
constexpr double kRateSlack = 1e-12;
constexpr double kTie = 1e-12;
constexpr int kGammaWindow = 200;
constexpr double kGammaMargin = 1e-9;

// Quotient of geometric sums along one axis with the dominant power factored
// out, so nothing underflows for large n.
struct AxisQuotient {
  double ratio_prev;  // sum c z^{n-1} / sum c z^n
  double ratio_drift; // sum c w z^n / (1-z) / sum c z^n
};

template <typename Z>
AxisQuotient axis_quotient(const std::vector<GeometricTerm>& terms, const std::vector<double>& w,
                           Z z_of, double z_star, int n) {
  double den = 0.0, prev = 0.0, drift = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const double z = z_of(terms[k]);
    const double scaled = terms[k].c * std::pow(z / z_star, n);
    den += scaled;
    prev += scaled / z;
    drift += scaled * w[k] / (1.0 - z);
  }
  if (!(den > 0.0))
    throw NegativeRate("stationary mass on the axis is not positive at n = " + std::to_string(n));
  return {prev / den, drift / den};
}

double rho_of(const GeometricTerm& t) { return t.rho; }
double sigma_of(const GeometricTerm& t) { return t.sigma; }

}  // namespace

std::vector<double> alpha_coefficients(const RandomWalk& base, const GeometricSum& pi) {
  const RateTable& q = base.interior();
  std::vector<double> alpha;
  for (const auto& t : pi.terms()) {
    double a = 0.0;
    for (int i = -1; i <= 1; ++i) a += q(i, 1) - std::pow(t.rho, -i) * t.sigma * q(i, -1);
    alpha.push_back(a);
  }
  return alpha;
}

std::vector<double> beta_coefficients(const RandomWalk& base, const GeometricSum& pi) {
  const RateTable& q = base.interior();
  std::vector<double> beta;
  for (const auto& t : pi.terms()) {
    double b = 0.0;
    for (int j = -1; j <= 1; ++j) b += q(1, j) - t.rho * std::pow(t.sigma, -j) * q(-1, j);
    beta.push_back(b);
  }
  return beta;
}

LimitParams limit_params(const GeometricSum& pi) {
  LimitParams lp;
  for (const auto& t : pi.terms()) {
    lp.rho_star = std::max(lp.rho_star, t.rho);
    lp.sigma_star2 = std::max(lp.sigma_star2, t.sigma);
  }
  double wsum = 0.0, wsig = 0.0, vsum = 0.0, vrho = 0.0;
  for (const auto& t : pi.terms()) {
    if (std::abs(t.rho - lp.rho_star) <= kTie) {
      wsum += t.c;
      wsig += t.c * t.sigma;
    }
    if (std::abs(t.sigma - lp.sigma_star2) <= kTie) {
      vsum += t.c;
      vrho += t.c * t.rho;
    }
  }
  lp.sigma_star = wsig / wsum;
  lp.rho_star2 = vrho / vsum;
  return lp;
}

double PerturbedWalk::h_minus(int n1) const {
  if (n1 < 1) throw DomainError("h_bar_{-1,0} is defined for n1 >= 1");
  const auto qt = axis_quotient(pi_.terms(), params_.alpha, rho_of, limits_.rho_star, n1);
  return qt.ratio_prev * params_.h_bar_10 - qt.ratio_drift;
}

double PerturbedWalk::v_minus(int n2) const {
  if (n2 < 1) throw DomainError("v_bar_{0,-1} is defined for n2 >= 1");
  const auto qt = axis_quotient(pi_.terms(), params_.beta, sigma_of, limits_.sigma_star2, n2);
  return qt.ratio_prev * params_.v_bar_01 - qt.ratio_drift;
}

double PerturbedWalk::rate(State s, Direction d) const {
  const Component c = component_of(s);
  if (!in_neighborhood(c, d)) return 0.0;
  const RateTable& q = base_.interior();
  switch (c) {
    case Component::Interior:
      return q(d);
    case Component::Horizontal:
      if (d.j == 1) return q(d);
      if (d.i == 1) return params_.h_bar_10;
      return h_minus(s.n1);
    case Component::Vertical:
      if (d.i == 1) return q(d);
      if (d.j == 1) return params_.v_bar_01;
      return v_minus(s.n2);
    case Component::Origin:
      if (d == Direction{1, 0}) return params_.h_bar_10;
      if (d == Direction{0, 1}) return params_.v_bar_01;
      return q(1, 1);
  }
  return 0.0;
}

PerturbedWalk build_perturbation(const RandomWalk& base, const GeometricSum& pi, double h_bar_10,
                                 double v_bar_01) {
  if (!(h_bar_10 >= 0.0 && v_bar_01 >= 0.0) || !std::isfinite(h_bar_10) || !std::isfinite(v_bar_01))
    throw NegativeRate("h_bar_10 and v_bar_01 must be finite and non-negative");
  for (const auto& t : pi.terms()) {
    const double res = curve_residual_Q(base, t.rho, t.sigma);
    if (!(std::abs(res) < kOnQ))
      throw NotOnQ("term (" + std::to_string(t.rho) + ", " + std::to_string(t.sigma) +
                   ") misses the interior curve, residual " + std::to_string(res));
  }

  PerturbedWalk walk(base, pi);
  walk.params_ = {alpha_coefficients(base, pi), beta_coefficients(base, pi), h_bar_10, v_bar_01};
  walk.limits_ = limit_params(pi);

  const auto count_ties = [&](auto key, double top) {
    return std::count_if(pi.terms().begin(), pi.terms().end(),
                         [&](const GeometricTerm& t) { return std::abs(key(t) - top) <= kTie; });
  };
  if (count_ties(rho_of, walk.limits_.rho_star) > 2)
    walk.warnings_.push_back("more than two terms share the largest rho");
  if (count_ties(sigma_of, walk.limits_.sigma_star2) > 2)
    walk.warnings_.push_back("more than two terms share the largest sigma");

  for (int n = 1; n <= PerturbedWalk::kRateWindow; ++n) {
    if (walk.h_minus(n) < -kRateSlack)
      throw NegativeRate("h_bar_{-1,0}(" + std::to_string(n) + ",0) is negative");
    if (walk.v_minus(n) < -kRateSlack)
      throw NegativeRate("v_bar_{0,-1}(0," + std::to_string(n) + ") is negative");
  }
  const LimitRates lim = limit_rates(walk);
  if (lim.h < -kRateSlack || lim.v < -kRateSlack)
    throw NegativeRate("limiting axis rate is negative");

  walk.gamma_bar_ = gamma_bar(walk);
  return walk;
}

LimitRates limit_rates(const PerturbedWalk& walk) {
  const RateTable& q = walk.base().interior();
  const LimitParams& lp = walk.limit_params();
  const auto& p = walk.params();
  double sh = 0.0, sv = 0.0;
  for (int i = -1; i <= 1; ++i) sh += q(i, 1) - std::pow(lp.rho_star, -i) * lp.sigma_star * q(i, -1);
  for (int j = -1; j <= 1; ++j)
    sv += q(1, j) - lp.rho_star2 * std::pow(lp.sigma_star2, -j) * q(-1, j);
  return {p.h_bar_10 / lp.rho_star - sh / (1.0 - lp.rho_star),
          p.v_bar_01 / lp.sigma_star2 - sv / (1.0 - lp.sigma_star2)};
}

Thresholds thresholds(const RandomWalk& base, const GeometricSum& pi) {
  if (!pi.all_coefficients_positive())
    throw NegativeCoefficient("closed-form thresholds need every c_k > 0");
  const auto alpha = alpha_coefficients(base, pi);
  const auto beta = beta_coefficients(base, pi);
  Thresholds th{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  const double h_down = base.horizontal()(-1, 0);
  const double v_down = base.vertical()(0, -1);
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const auto& t = pi.terms()[k];
    th.h_min = std::max(th.h_min, t.rho * h_down + t.rho * alpha[k] / (1.0 - t.rho));
    th.v_min = std::max(th.v_min, t.sigma * v_down + t.sigma * beta[k] / (1.0 - t.sigma));
  }
  return th;
}

double gamma_bar(const PerturbedWalk& walk) {
  const RateTable& q = walk.base().interior();
  const auto& p = walk.params();
  const LimitRates lim = limit_rates(walk);
  double sup_h = lim.h, sup_v = lim.v;
  for (int n = 1; n <= kGammaWindow; ++n) {
    sup_h = std::max(sup_h, walk.h_minus(n));
    sup_v = std::max(sup_v, walk.v_minus(n));
  }
  const double horizontal = q(-1, 1) + q(0, 1) + q(1, 1) + p.h_bar_10 + sup_h + kGammaMargin;
  const double vertical = q(1, -1) + q(1, 0) + q(1, 1) + p.v_bar_01 + sup_v + kGammaMargin;
  const double origin = p.h_bar_10 + p.v_bar_01 + q(1, 1);
  return std::max({q.total(), horizontal, vertical, origin});
}

ThresholdCheck check_thresholds(const PerturbedWalk& walk) {
  const double h_down = walk.base().horizontal()(-1, 0);
  const double v_down = walk.base().vertical()(0, -1);
  const LimitRates lim = limit_rates(walk);
  double margin = std::min(lim.h - h_down, lim.v - v_down);
  for (int n = 1; n <= PerturbedWalk::kRateWindow; ++n)
    margin = std::min({margin, walk.h_minus(n) - h_down, walk.v_minus(n) - v_down});

  ThresholdCheck out;
  out.min_margin = margin;
  if (walk.pi_bar().all_coefficients_positive()) {
    const Thresholds th = thresholds(walk.base(), walk.pi_bar());
    if (walk.params().h_bar_10 >= th.h_min - kRateSlack &&
        walk.params().v_bar_01 >= th.v_min - kRateSlack) {
      out.holds = true;
      out.route = "sufficient-condition";
      return out;
    }
  }
  out.holds = margin >= -kRateSlack;
  out.route = out.holds ? "empirically verified" : "violated";
  return out;
}

}  // namespace qpb
