#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "qpbound/errorbound.hpp"
#include "qpbound/geomsum.hpp"
#include "qpbound/model.hpp"
#include "qpbound/perturb.hpp"

namespace qpb {

using RateFunction = std::function<double(State, Direction)>;

/// Slot of a direction in a 3x3 stencil array; the centre slot 4 is unused.
constexpr int direction_slot(Direction d) { return (d.i + 1) * 3 + (d.j + 1); }

/// A walk restricted to the grid [0,N]^2. Moves that would leave the grid
/// are redirected back to the source state, so the generator stays
/// conservative. Transition probabilities are the rates divided by gamma_u
/// with the remainder as a self-loop.
class TruncatedChain {
 public:
  /// gamma_u <= 0 selects the largest outflow over the grid.
  TruncatedChain(int N, const RateFunction& rate, double gamma_u = 0.0);

  template <RateField W>
  TruncatedChain(int N, const W& walk, double gamma_u = 0.0)
      : TruncatedChain(N, RateFunction([&walk](State s, Direction d) { return walk.rate(s, d); }),
                       gamma_u) {}

  int size() const { return N_; }
  int states() const { return (N_ + 1) * (N_ + 1); }
  int index(State s) const { return s.n1 * (N_ + 1) + s.n2; }
  State state(int idx) const { return {idx / (N_ + 1), idx % (N_ + 1)}; }
  bool contains(State s) const { return s.n1 >= 0 && s.n2 >= 0 && s.n1 <= N_ && s.n2 <= N_; }
  double gamma_u() const { return gamma_u_; }
  double max_outflow() const { return max_outflow_; }

  /// Largest |sum_j p(s, j) - 1| over the grid.
  double max_row_sum_error() const;

  // Compressed rows of the uniformized operator (in-grid moves only).
  const std::vector<int>& row_offsets() const { return offsets_; }
  const std::vector<int>& targets() const { return targets_; }
  const std::vector<double>& probabilities() const { return probs_; }
  const std::vector<double>& stay() const { return stay_; }

 private:
  int N_;
  double gamma_u_;
  double max_outflow_ = 0.0;
  std::vector<int> offsets_;
  std::vector<int> targets_;
  std::vector<double> probs_;
  std::vector<double> stay_;
};

enum class StationaryMethod { Direct, Iterative };

struct StationaryOptions {
  StationaryMethod method = StationaryMethod::Direct;
  int max_sweeps = 200000;
  double tolerance = 1e-12;
};

/// Stationary distribution of the truncated chain, indexed by chain.index().
/// Every balance residual is below options.tolerance on return.
std::vector<double> stationary(const TruncatedChain& chain, const StationaryOptions& options = {});

/// Largest absolute balance residual of `pi` on the truncated chain.
double max_balance_residual(const TruncatedChain& chain, const std::vector<double>& pi);

/// Bias terms D^t_{i,j}(s) = F^t(s + (i,j)) - F^t(s), divided by gamma_u so
/// they are in rate units. Only tracked states carry sup data.
class BiasTable {
 public:
  int horizon() const { return T_; }
  int size() const { return N_; }
  double gamma_u() const { return gamma_u_; }

  bool tracked(State s) const;
  /// max over 1 <= t <= T of |D^t_d(s)|.
  double sup_dir(State s, Direction d) const;
  /// max over directions of sup_dir.
  double sup_abs(State s) const;
  /// Same as sup_abs but for the horizon T/2.
  double sup_abs_half(State s) const;
  /// Largest sup_abs over tracked states.
  double max_sup_abs() const;
  /// max over tracked states with max(n1, n2) <= window of
  /// |sup_abs at T - sup_abs at T/2|. window < 0 means N / 2; states near the
  /// truncation edge keep drifting and are left out.
  double sup_drift(int window = -1) const;

  /// F^T on the grid.
  const std::vector<double>& final_values() const { return F_T_; }

  /// Cesaro estimate of the long-run reward: (F^T - F^{T/2}) / (T/2) at the
  /// origin, and the same quotient over [T/4, T/2].
  double cesaro() const { return cesaro_; }
  double cesaro_previous() const { return cesaro_prev_; }
  bool cesaro_converged(double tol = 1e-6) const;

 private:
  friend class ValueIterationRunner;

  int N_ = 0;
  int T_ = 0;
  double gamma_u_ = 1.0;
  std::vector<int> slot_of_state_;           // -1 if untracked
  std::vector<std::array<double, 9>> sup_;   // per tracked state
  std::vector<std::array<double, 9>> half_;  // snapshot at T/2
  std::vector<double> F_T_;
  double cesaro_ = 0.0;
  double cesaro_prev_ = 0.0;
};

struct ValueIterationOptions {
  /// Boundary states are always tracked. With track_window >= 0 every state
  /// with max(n1, n2) <= track_window is tracked too.
  int track_window = -1;
  /// Called with F^t for t = 0..T.
  std::function<void(int, const std::vector<double>&)> observer;
};

/// F^0 = 0, F^t = F + P F^{t-1} on the truncated chain.
BiasTable value_iteration(const TruncatedChain& chain, const Reward& reward, int T,
                          const ValueIterationOptions& options = {});

/// 2 * (tail mass of pi_bar outside the grid * max |F| on the grid + reward
/// tail of pi_bar outside the grid) + solver tolerance 1e-9 * max(1, |F_bar|).
double truncation_allowance(const GeometricSum& pi_bar, const Reward& reward, int N, double F_bar);

struct ConditionCheck {
  bool holds = true;
  double min_margin = 0.0;
  State worst{0, 0};
  int window = 0;
  std::string label;
};

/// Checks sum_d |perturbed(s,d) - original(s,d)| sup_t |D^t_d(s)| <= G(s) with
/// G(s) = B(s) * sum_d |perturbed(s,d) - original(s,d)| at the origin and at
/// axis states with n <= window. Only t <= T is covered.
ConditionCheck check_conditions(const BiasTable& bias, const RateFunction& original,
                                const RateFunction& perturbed, const BiasBounds& bounds,
                                int window);

struct OracleOptions {
  int N = 200;
  int T = 5000;
  /// <= 0 picks the largest outflow of all chains involved.
  double gamma_u = 0.0;
  /// Axis window for the condition check; < 0 means N / 2.
  int check_window = -1;
  bool throw_on_violation = true;
};

/// Truncated stationary solve and value iteration for one walk and reward.
struct OracleRun {
  int N = 0;
  std::vector<double> pi;
  double F_oracle = 0.0;
  double balance_residual = 0.0;
  BiasTable bias;
};

OracleRun run_oracle(const RandomWalk& walk, const Reward& reward, int N, int T, double gamma_u,
                     const ValueIterationOptions& vi = {});

/// Expected reward of the truncated stationary distribution.
double oracle_expectation(const TruncatedChain& chain, const std::vector<double>& pi,
                          const Reward& reward);

struct VerificationReport {
  double F_bar = 0.0;
  double F_oracle = 0.0;
  double bound = 0.0;
  double allowance = 0.0;
  /// bound + allowance - |F_bar - F_oracle|
  double margin = 0.0;
  bool passed = false;
  ConditionCheck conditions;
  bool cesaro_converged = false;
  double cesaro = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
};

/// Compares the closed-form F_bar to the oracle value. Throws BoundViolated
/// when the difference exceeds bound + allowance and throw_on_violation.
VerificationReport compare_with_oracle(const OracleRun& run, const GeometricSum& pi_bar,
                                       const Reward& reward, double bound,
                                       const ConditionCheck& conditions, bool throw_on_violation);

VerificationReport verify_bound(const RandomWalk& base, const PerturbedWalk& walk,
                                const Reward& reward, const BiasBounds& bias,
                                const OracleOptions& options = {});

VerificationReport verify_homogeneous(const RandomWalk& base, const RandomWalk& perturbed,
                                      const GeometricSum& pi_bar, const Reward& reward,
                                      const BiasBounds& bias, const OracleOptions& options = {});

}  // namespace qpb
