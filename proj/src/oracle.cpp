#include "qpbound/oracle.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qpb {

namespace {

constexpr std::array<Direction, 8> kAllDirections{
    Direction{-1, -1}, Direction{-1, 0}, Direction{-1, 1}, Direction{0, -1},
    Direction{0, 1},   Direction{1, -1}, Direction{1, 0},  Direction{1, 1}};

constexpr double kConditionSlack = 1e-12;
constexpr double kSolverTolerance = 1e-9;

std::vector<double> reward_on_grid(const TruncatedChain& chain, const Reward& reward) {
  std::vector<double> f(static_cast<std::size_t>(chain.states()));
  for (int k = 0; k < chain.states(); ++k) f[k] = reward_value(reward, chain.state(k));
  return f;
}

std::vector<double> residual_vector(const TruncatedChain& chain, const std::vector<double>& pi) {
  const auto& off = chain.row_offsets();
  const auto& tgt = chain.targets();
  const auto& p = chain.probabilities();
  const double g = chain.gamma_u();
  std::vector<double> r(pi.size(), 0.0);
  for (int s = 0; s < chain.states(); ++s) {
    for (int e = off[s]; e < off[s + 1]; ++e) {
      const double flow = pi[s] * p[e] * g;
      r[tgt[e]] += flow;
      r[s] -= flow;
    }
  }
  return r;
}

std::vector<double> stationary_direct(const TruncatedChain& chain, const StationaryOptions& opt) {
  using SpMat = Eigen::SparseMatrix<double>;
  const int n = chain.states();
  const auto& off = chain.row_offsets();
  const auto& tgt = chain.targets();
  const auto& p = chain.probabilities();
  const double g = chain.gamma_u();

  // Balance equations with the first one replaced by pi(0) = 1; a dense
  // normalization row would destroy the sparsity of the factors.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(off.back() + n));
  for (int s = 0; s < n; ++s) {
    double out = 0.0;
    for (int e = off[s]; e < off[s + 1]; ++e) {
      out += p[e] * g;
      if (tgt[e] != 0) trip.emplace_back(tgt[e], s, p[e] * g);
    }
    trip.emplace_back(s, s, s == 0 ? 1.0 : -out);
  }
  SpMat A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SingularSystem("sparse LU factorization failed");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[0] = 1.0;
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw SingularSystem("sparse LU solve failed");

  std::vector<double> pi(x.data(), x.data() + n);
  for (int pass = 0; pass < 4; ++pass) {
    const auto r = residual_vector(chain, pi);
    double worst = 0.0;
    for (int s = 1; s < n; ++s) worst = std::max(worst, std::abs(r[s]));
    if (worst < 0.01 * opt.tolerance * std::abs(pi[0])) break;
    Eigen::VectorXd corr(n);
    corr[0] = 0.0;
    for (int s = 1; s < n; ++s) corr[s] = -r[s];
    const Eigen::VectorXd dx = lu.solve(corr);
    for (int s = 0; s < n; ++s) pi[s] += dx[s];
  }
  double mass = 0.0;
  for (double v : pi) mass += v;
  if (!(mass > 0.0)) throw SingularSystem("stationary solve produced no mass");
  for (double& v : pi) v /= mass;
  return pi;
}

std::vector<double> stationary_iterative(const TruncatedChain& chain,
                                         const StationaryOptions& opt) {
  const int n = chain.states();
  const auto& off = chain.row_offsets();
  const auto& tgt = chain.targets();
  const auto& p = chain.probabilities();

  // Incoming edges per state.
  std::vector<int> in_off(static_cast<std::size_t>(n) + 1, 0);
  for (int e = 0; e < off.back(); ++e) ++in_off[tgt[e] + 1];
  for (int s = 0; s < n; ++s) in_off[s + 1] += in_off[s];
  std::vector<int> in_src(static_cast<std::size_t>(off.back()));
  std::vector<double> in_p(static_cast<std::size_t>(off.back()));
  std::vector<int> fill(in_off.begin(), in_off.end() - 1);
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int s = 0; s < n; ++s) {
    for (int e = off[s]; e < off[s + 1]; ++e) {
      in_src[fill[tgt[e]]] = s;
      in_p[fill[tgt[e]]++] = p[e];
      out[s] += p[e];
    }
    if (!(out[s] > 0.0)) throw SingularSystem("state without outflow; chain is not irreducible");
  }

  std::vector<double> pi(static_cast<std::size_t>(n), 1.0 / n);
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    for (int s = 0; s < n; ++s) {
      double inflow = 0.0;
      for (int e = in_off[s]; e < in_off[s + 1]; ++e) inflow += pi[in_src[e]] * in_p[e];
      pi[s] = inflow / out[s];
    }
    double mass = 0.0;
    for (double v : pi) mass += v;
    for (double& v : pi) v /= mass;
    if (sweep % 10 == 0 && max_balance_residual(chain, pi) < opt.tolerance) return pi;
  }
  throw NotConverged("Gauss-Seidel stationary solve did not reach the residual target");
}

}  // namespace

// ---------------------------------------------------------------------------

TruncatedChain::TruncatedChain(int N, const RateFunction& rate, double gamma_u) : N_(N) {
  if (N < 0) throw DomainError("truncation level must be non-negative");
  const int n = states();
  std::vector<double> outflow(static_cast<std::size_t>(n), 0.0);
  std::vector<std::array<double, 9>> rates(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const State s = state(k);
    rates[k].fill(0.0);
    for (const Direction d : neighborhood(s)) {
      const double r = rate(s, d);
      if (!(r >= 0.0) || !std::isfinite(r))
        throw NegativeRate("rate at (" + std::to_string(s.n1) + "," + std::to_string(s.n2) +
                           ") is negative or not finite");
      rates[k][direction_slot(d)] = r;
      outflow[k] += r;
    }
    max_outflow_ = std::max(max_outflow_, outflow[k]);
  }
  if (gamma_u <= 0.0) gamma_u = max_outflow_;
  if (gamma_u < max_outflow_ * (1.0 - 1e-15))
    throw DomainError("gamma_u is below the largest outflow on the grid");
  if (!(gamma_u > 0.0)) gamma_u = 1.0;
  gamma_u_ = gamma_u;

  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  stay_.assign(static_cast<std::size_t>(n), 1.0);
  for (int k = 0; k < n; ++k) {
    const State s = state(k);
    double moved = 0.0;
    for (const Direction d : kAllDirections) {
      const double r = rates[k][direction_slot(d)];
      const State to{s.n1 + d.i, s.n2 + d.j};
      if (r == 0.0 || !contains(to)) continue;
      targets_.push_back(index(to));
      probs_.push_back(r / gamma_u_);
      moved += r / gamma_u_;
    }
    stay_[k] = 1.0 - moved;
    offsets_[k + 1] = static_cast<int>(targets_.size());
  }
}

double TruncatedChain::max_row_sum_error() const {
  double worst = 0.0;
  for (int s = 0; s < states(); ++s) {
    double sum = stay_[s];
    for (int e = offsets_[s]; e < offsets_[s + 1]; ++e) sum += probs_[e];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

double max_balance_residual(const TruncatedChain& chain, const std::vector<double>& pi) {
  const auto r = residual_vector(chain, pi);
  double worst = 0.0;
  for (double v : r) worst = std::max(worst, std::abs(v));
  return worst;
}

std::vector<double> stationary(const TruncatedChain& chain, const StationaryOptions& options) {
  if (chain.states() == 1) return {1.0};
  std::vector<double> pi;
  if (options.method == StationaryMethod::Direct) {
    try {
      pi = stationary_direct(chain, options);
    } catch (const SingularSystem&) {
      pi = stationary_iterative(chain, options);
    }
  } else {
    pi = stationary_iterative(chain, options);
  }
  const double res = max_balance_residual(chain, pi);
  if (!(res < options.tolerance))
    throw NotConverged("stationary residual " + std::to_string(res) + " above target");
  return pi;
}

// ---------------------------------------------------------------------------

bool BiasTable::tracked(State s) const {
  if (s.n1 < 0 || s.n2 < 0 || s.n1 > N_ || s.n2 > N_) return false;
  return slot_of_state_[static_cast<std::size_t>(s.n1 * (N_ + 1) + s.n2)] >= 0;
}

double BiasTable::sup_dir(State s, Direction d) const {
  if (!tracked(s)) throw DomainError("state is not tracked by this bias table");
  return sup_[static_cast<std::size_t>(slot_of_state_[s.n1 * (N_ + 1) + s.n2])]
             [direction_slot(d)];
}

double BiasTable::sup_abs(State s) const {
  if (!tracked(s)) throw DomainError("state is not tracked by this bias table");
  const auto& a = sup_[static_cast<std::size_t>(slot_of_state_[s.n1 * (N_ + 1) + s.n2])];
  return *std::max_element(a.begin(), a.end());
}

double BiasTable::sup_abs_half(State s) const {
  if (!tracked(s)) throw DomainError("state is not tracked by this bias table");
  const auto& a = half_[static_cast<std::size_t>(slot_of_state_[s.n1 * (N_ + 1) + s.n2])];
  return *std::max_element(a.begin(), a.end());
}

double BiasTable::max_sup_abs() const {
  double m = 0.0;
  for (const auto& a : sup_) m = std::max(m, *std::max_element(a.begin(), a.end()));
  return m;
}

double BiasTable::sup_drift(int window) const {
  if (window < 0) window = N_ / 2;
  double m = 0.0;
  for (int n1 = 0; n1 <= std::min(window, N_); ++n1) {
    for (int n2 = 0; n2 <= std::min(window, N_); ++n2) {
      if (!tracked({n1, n2})) continue;
      m = std::max(m, std::abs(sup_abs({n1, n2}) - sup_abs_half({n1, n2})));
    }
  }
  return m;
}

bool BiasTable::cesaro_converged(double tol) const {
  return std::abs(cesaro_ - cesaro_prev_) < tol;
}

class ValueIterationRunner {
 public:
  static BiasTable run(const TruncatedChain& chain, const Reward& reward, int T,
                       const ValueIterationOptions& opt) {
    if (T < 0) throw DomainError("horizon must be non-negative");
    const int n = chain.states();
    const int N = chain.size();
    const std::vector<double> f = reward_on_grid(chain, reward);
    for (double v : f)
      if (!std::isfinite(v) || v < 0.0) throw DomainError("reward must be finite and non-negative");

    BiasTable table;
    table.N_ = N;
    table.T_ = T;
    table.gamma_u_ = chain.gamma_u();
    table.slot_of_state_.assign(static_cast<std::size_t>(n), -1);

    struct Edge {
      int from;
      int to;
      int cell;  // tracked slot * 9 + direction slot
    };
    std::vector<Edge> edges;
    int next = 0;
    for (int k = 0; k < n; ++k) {
      const State s = chain.state(k);
      const bool boundary = s.n1 == 0 || s.n2 == 0;
      const bool in_window = opt.track_window >= 0 && s.n1 <= opt.track_window &&
                             s.n2 <= opt.track_window;
      if (!boundary && !in_window) continue;
      const int slot = next++;
      table.slot_of_state_[k] = slot;
      for (const Direction d : neighborhood(s)) {
        const State to{s.n1 + d.i, s.n2 + d.j};
        if (chain.contains(to)) edges.push_back({k, chain.index(to), slot * 9 + direction_slot(d)});
      }
    }
    std::vector<double> sup(static_cast<std::size_t>(next) * 9, 0.0);
    std::vector<double> half;

    const auto& off = chain.row_offsets();
    const auto& tgt = chain.targets();
    const auto& p = chain.probabilities();
    const auto& stay = chain.stay();
    const double inv_gamma = 1.0 / chain.gamma_u();

    std::vector<double> prev(static_cast<std::size_t>(n), 0.0), cur(static_cast<std::size_t>(n));
    if (opt.observer) opt.observer(0, prev);
    const int quarter = T / 4, mid = T / 2;
    double f_quarter = 0.0, f_mid = 0.0;
    if (T == 0) half = sup;
    for (int t = 1; t <= T; ++t) {
      for (int s = 0; s < n; ++s) {
        double acc = f[s] + stay[s] * prev[s];
        for (int e = off[s]; e < off[s + 1]; ++e) acc += p[e] * prev[tgt[e]];
        cur[s] = acc;
      }
      for (const Edge& e : edges) {
        const double d = std::abs(cur[e.to] - cur[e.from]) * inv_gamma;
        if (d > sup[e.cell]) sup[e.cell] = d;
      }
      if (t == quarter) f_quarter = cur[0];
      if (t == mid) {
        f_mid = cur[0];
        half = sup;
      }
      if (opt.observer) opt.observer(t, cur);
      std::swap(prev, cur);
    }

    auto unpack = [next](const std::vector<double>& flat) {
      std::vector<std::array<double, 9>> out(static_cast<std::size_t>(next));
      for (int k = 0; k < next; ++k)
        std::copy_n(flat.begin() + 9 * k, 9, out[static_cast<std::size_t>(k)].begin());
      return out;
    };
    table.sup_ = unpack(sup);
    table.half_ = unpack(half);
    table.F_T_ = std::move(prev);
    if (T >= 4) {
      table.cesaro_ = (table.F_T_[0] - f_mid) / (T - mid);
      table.cesaro_prev_ = (f_mid - f_quarter) / (mid - quarter);
    } else if (T > 0) {
      table.cesaro_ = table.cesaro_prev_ = table.F_T_[0] / T;
    }
    return table;
  }
};

BiasTable value_iteration(const TruncatedChain& chain, const Reward& reward, int T,
                          const ValueIterationOptions& options) {
  return ValueIterationRunner::run(chain, reward, T, options);
}

// ---------------------------------------------------------------------------

double truncation_allowance(const GeometricSum& pi_bar, const Reward& reward, int N, double F_bar) {
  const double tail_mass = reward_tail_outside(pi_bar, Polynomial{{Monomial{0, 0, 1.0}}}, N);
  double max_f = 0.0;
  for (int n1 = 0; n1 <= N; ++n1)
    for (int n2 = 0; n2 <= N; ++n2)
      max_f = std::max(max_f, std::abs(reward_value(reward, {n1, n2})));
  const double reward_tail =
      std::holds_alternative<CustomReward>(reward) ? 0.0 : reward_tail_outside(pi_bar, reward, N);
  return 2.0 * (tail_mass * max_f + reward_tail) + kSolverTolerance * std::max(1.0, std::abs(F_bar));
}

ConditionCheck check_conditions(const BiasTable& bias, const RateFunction& original,
                                const RateFunction& perturbed, const BiasBounds& bounds,
                                int window) {
  ConditionCheck out;
  out.window = std::min(window, bias.size() - 1);
  out.label = "empirical (horizon " + std::to_string(bias.horizon()) + ")";
  out.min_margin = std::numeric_limits<double>::infinity();

  auto visit = [&](State s, double B) {
    double weight = 0.0, used = 0.0;
    for (const Direction d : neighborhood(s)) {
      const double w = std::abs(perturbed(s, d) - original(s, d));
      weight += w;
      used += w * bias.sup_dir(s, d);
    }
    const double margin = B * weight - used;
    if (margin < out.min_margin) {
      out.min_margin = margin;
      out.worst = s;
    }
  };
  visit({0, 0}, bounds.b3);
  for (int n = 1; n <= out.window; ++n) {
    visit({n, 0}, bounds.B1(n));
    visit({0, n}, bounds.B2(n));
  }
  out.holds = out.min_margin >= -kConditionSlack * std::max(1.0, bias.max_sup_abs());
  return out;
}

double oracle_expectation(const TruncatedChain& chain, const std::vector<double>& pi,
                          const Reward& reward) {
  double sum = 0.0;
  for (int k = 0; k < chain.states(); ++k) sum += pi[k] * reward_value(reward, chain.state(k));
  return sum;
}

OracleRun run_oracle(const RandomWalk& walk, const Reward& reward, int N, int T, double gamma_u,
                     const ValueIterationOptions& vi) {
  const TruncatedChain chain(N, walk, gamma_u);
  OracleRun run;
  run.N = N;
  run.pi = stationary(chain);
  run.balance_residual = max_balance_residual(chain, run.pi);
  run.F_oracle = oracle_expectation(chain, run.pi, reward);
  run.bias = value_iteration(chain, reward, T, vi);
  return run;
}

std::string VerificationReport::csv_header() {
  return "F_bar,F_oracle,bound,allowance,margin,passed,conditions_hold,condition_margin,"
         "condition_check,cesaro_converged";
}

std::string VerificationReport::csv_row() const {
  std::ostringstream os;
  os.precision(12);
  os << F_bar << ',' << F_oracle << ',' << bound << ',' << allowance << ',' << margin << ','
     << (passed ? "pass" : "fail") << ',' << (conditions.holds ? "true" : "false") << ','
     << conditions.min_margin << ',' << conditions.label << ','
     << (cesaro_converged ? "true" : "false");
  return os.str();
}

VerificationReport compare_with_oracle(const OracleRun& run, const GeometricSum& pi_bar,
                                       const Reward& reward, double bound,
                                       const ConditionCheck& conditions, bool throw_on_violation) {
  VerificationReport rep;
  rep.F_bar = expected_reward(pi_bar, reward);
  rep.F_oracle = run.F_oracle;
  rep.bound = bound;
  rep.allowance = truncation_allowance(pi_bar, reward, run.N, rep.F_bar);
  rep.margin = bound + rep.allowance - std::abs(rep.F_bar - rep.F_oracle);
  rep.passed = rep.margin >= 0.0;
  rep.conditions = conditions;
  rep.cesaro = run.bias.cesaro();
  rep.cesaro_converged = run.bias.cesaro_converged();
  if (!rep.passed && throw_on_violation) {
    std::ostringstream os;
    os.precision(10);
    os << "|F_bar - F_oracle| = " << std::abs(rep.F_bar - rep.F_oracle) << " exceeds bound "
       << bound << " + allowance " << rep.allowance;
    throw BoundViolated(os.str(), -rep.margin);
  }
  return rep;
}

namespace {

int condition_window(const OracleOptions& o) { return o.check_window < 0 ? o.N / 2 : o.check_window; }

}  // namespace

VerificationReport verify_bound(const RandomWalk& base, const PerturbedWalk& walk,
                                const Reward& reward, const BiasBounds& bias,
                                const OracleOptions& options) {
  const ErrorBoundReport eb = error_bound(base, walk, bias);
  const double gamma = options.gamma_u > 0.0 ? options.gamma_u
                                             : std::max(base.gamma(), walk.gamma_bar());
  const OracleRun run = run_oracle(base, reward, options.N, options.T, gamma);
  const ConditionCheck cond = check_conditions(
      run.bias, [&](State s, Direction d) { return base.rate(s, d); },
      [&](State s, Direction d) { return walk.rate(s, d); }, bias, condition_window(options));
  return compare_with_oracle(run, walk.pi_bar(), reward, eb.total, cond,
                             options.throw_on_violation);
}

VerificationReport verify_homogeneous(const RandomWalk& base, const RandomWalk& perturbed,
                                      const GeometricSum& pi_bar, const Reward& reward,
                                      const BiasBounds& bias, const OracleOptions& options) {
  const ErrorBoundReport eb = homogeneous_error_bound(base, perturbed, pi_bar, bias);
  const double gamma = options.gamma_u > 0.0 ? options.gamma_u
                                             : std::max(base.gamma(), perturbed.gamma());
  const OracleRun run = run_oracle(base, reward, options.N, options.T, gamma);
  const ConditionCheck cond = check_conditions(
      run.bias, [&](State s, Direction d) { return base.rate(s, d); },
      [&](State s, Direction d) { return perturbed.rate(s, d); }, bias, condition_window(options));
  return compare_with_oracle(run, pi_bar, reward, eb.total, cond, options.throw_on_violation);
}

}  // namespace qpb
