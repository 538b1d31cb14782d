// Command-line front end: curves, perturbation construction, error bounds,
// oracle verification and parameter sweeps.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qpbound/biaslp.hpp"
#include "qpbound/errorbound.hpp"
#include "qpbound/experiments.hpp"
#include "qpbound/model_file.hpp"
#include "qpbound/oracle.hpp"

namespace {

using namespace qpb;

constexpr int kExitViolated = 2;
constexpr int kExitPrecondition = 3;

struct CommonOptions {
  std::string model;
  double lambda = 0.2;
  double mu = 0.6;
  std::optional<double> mu_star;
  std::optional<double> eta;
  std::string reward = "empty";
  int trunc = 200;
  int horizon = 5000;
  int bias_degree = -1;
  int constraint_window = 100;
  std::optional<double> bias_constant;
  std::string out;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--model", o.model, "Model file; overrides the joint-departures parameters");
  app->add_option("--lambda", o.lambda, "Arrival rate of each queue")->capture_default_str();
  app->add_option("--mu", o.mu, "Joint service rate")->capture_default_str();
  auto* ms = app->add_option("--mu-star", o.mu_star, "Degraded service rate on the axes");
  auto* et = app->add_option("--eta", o.eta, "mu* / mu");
  ms->excludes(et);
  app->add_option("--reward", o.reward, "Reward function")
      ->check(CLI::IsMember({"empty", "n1"}))
      ->capture_default_str();
  app->add_option("--trunc", o.trunc, "Truncation level N of the oracle grid")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--horizon", o.horizon, "Value-iteration horizon T")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--bias-degree", o.bias_degree,
                  "Degree M of the LP bias bounds (default 0 for empty, 1 for n1)");
  app->add_option("--constraint-window", o.constraint_window, "LP constraint window N_c")
      ->capture_default_str();
  app->add_option("--bias-constant", o.bias_constant, "Use constant bias bounds B1 = B2 = B3");
  app->add_option("--out", o.out, "Output CSV (directory for curves)");
}

JointDeparturesConfig joint_config(const CommonOptions& o) {
  JointDeparturesConfig cfg{o.lambda, o.mu, 0.3 * o.mu};
  if (o.mu_star) cfg.mu_star = *o.mu_star;
  if (o.eta) cfg.mu_star = *o.eta * o.mu;
  cfg.validate();
  return cfg;
}

Reward reward_of(const CommonOptions& o) {
  return make_reward(o.reward == "n1" ? RewardKind::N1 : RewardKind::Empty);
}

int degree_of(const CommonOptions& o) {
  if (o.bias_degree >= 0) return o.bias_degree;
  return o.reward == "n1" ? 1 : 0;
}

/// Base walk and inhomogeneous perturbation, from a model file or from the
/// joint-departures parameters.
struct Problem {
  RandomWalk base;
  std::optional<PerturbedWalk> walk;
  std::optional<JointDeparturesConfig> joint;
  std::string status = "ok";
};

Problem make_problem(const CommonOptions& o) {
  if (o.model.empty()) {
    const JointDeparturesConfig cfg = joint_config(o);
    InhomogeneousSetup setup = inhomogeneous_perturbation(cfg);
    return {joint_departures_walk(cfg.lambda, cfg.mu, cfg.mu_star), std::move(setup.walk), cfg,
            setup.status};
  }
  const ModelSpec spec = load_model(o.model);
  if (spec.terms.empty()) throw DomainError("model file has no [pi] terms");
  const GeometricSum pi = spec.normalize_terms ? normalize(spec.terms) : GeometricSum(spec.terms);
  double h = spec.h_bar_10.value_or(spec.walk.horizontal()(1, 0));
  double v = spec.v_bar_01.value_or(spec.walk.vertical()(0, 1));
  if (spec.auto_threshold) {
    const Thresholds th = thresholds(spec.walk, pi);
    h = std::max(h, th.h_min);
    v = std::max(v, th.v_min);
  }
  return {spec.walk, build_perturbation(spec.walk, pi, h, v), std::nullopt, "ok"};
}

std::ostream& output(const CommonOptions& o, std::ofstream& file) {
  if (o.out.empty()) return std::cout;
  file.open(o.out);
  if (!file) throw Error("cannot write " + o.out);
  return file;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Bias bounds for the bound and oracle subcommands.
BiasBounds choose_bias(const CommonOptions& o, const Problem& p, const BiasTable* table) {
  if (o.bias_constant) return BiasBounds::constant(*o.bias_constant, *o.bias_constant, *o.bias_constant);
  if (o.reward == "empty" && p.joint && degree_of(o) == 0) {
    const double B = empty_system_bias_constant(p.joint->mu, p.joint->mu_star);
    return BiasBounds::constant(B, B, B);
  }
  if (!table) throw DomainError("LP bias bounds need oracle data");
  const BiasLpSolution sol =
      solve(assemble(p.base, *p.walk, *table, degree_of(o), o.constraint_window));
  std::cerr << "bias LP: objective " << fmt(sol.objective) << ", complementary slackness residual "
            << fmt(sol.cs_residual) << " (" << sol.label << ")\n";
  return sol.bounds;
}

bool needs_oracle_for_bias(const CommonOptions& o, const Problem& p) {
  return !o.bias_constant && !(o.reward == "empty" && p.joint && degree_of(o) == 0);
}

double oracle_gamma(const Problem& p) { return std::max(p.base.gamma(), p.walk->gamma_bar()); }

int cmd_curves(const CommonOptions& o) {
  const JointDeparturesConfig cfg = joint_config(o);
  const std::string dir = o.out.empty() ? "." : o.out;
  const auto points = run_curves(cfg, dir);
  std::cout << "label,rho,sigma\n";
  for (const auto& p : points) std::cout << p.label << ',' << fmt(p.rho) << ',' << fmt(p.sigma) << '\n';
  return 0;
}

int cmd_perturb(const CommonOptions& o) {
  const Problem p = make_problem(o);
  const PerturbedWalk& w = *p.walk;
  const LimitRates lim = limit_rates(w);
  const ThresholdCheck check = check_thresholds(w);
  std::cerr << "terms:";
  for (const auto& t : w.pi_bar().terms())
    std::cerr << " (" << fmt(t.rho) << ", " << fmt(t.sigma) << ", c=" << fmt(t.c) << ")";
  std::cerr << "\nh_bar_10 = " << fmt(w.params().h_bar_10) << ", v_bar_01 = " << fmt(w.params().v_bar_01)
            << " [" << p.status << "]\nlimit h_bar_-1,0 = " << fmt(lim.h)
            << ", limit v_bar_0,-1 = " << fmt(lim.v) << "\nthreshold check: "
            << (check.holds ? "holds" : "fails") << " (" << check.route << ", margin "
            << fmt(check.min_margin) << ")\ngamma_bar = " << fmt(w.gamma_bar()) << '\n';
  for (const auto& msg : w.warnings()) std::cerr << "warning: " << msg << '\n';
  std::ofstream file;
  std::ostream& os = output(o, file);
  os << "n,h_bar_minus,v_bar_minus\n";
  const int n_max = std::max(o.constraint_window, 1);
  for (int n = 1; n <= n_max; ++n) os << n << ',' << fmt(w.h_minus(n)) << ',' << fmt(w.v_minus(n)) << '\n';
  return 0;
}

int cmd_bound(const CommonOptions& o) {
  const Problem p = make_problem(o);
  std::optional<OracleRun> run;
  if (needs_oracle_for_bias(o, p))
    run = run_oracle(p.base, reward_of(o), o.trunc, o.horizon, oracle_gamma(p));
  const BiasBounds bias = choose_bias(o, p, run ? &run->bias : nullptr);
  const ErrorBoundReport rep = error_bound(p.base, *p.walk, bias);
  std::ofstream file;
  std::ostream& os = output(o, file);
  os << "h_bar_10,v_bar_01,degree,b3,delta_h,delta_v,delta_r,g1,g2,g3,total,route\n"
     << fmt(p.walk->params().h_bar_10) << ',' << fmt(p.walk->params().v_bar_01) << ','
     << bias.degree() << ',' << fmt(bias.b3) << ',' << fmt(rep.deltas.h) << ','
     << fmt(rep.deltas.v) << ',' << fmt(rep.deltas.r) << ',' << fmt(rep.g1) << ',' << fmt(rep.g2)
     << ',' << fmt(rep.g3) << ',' << fmt(rep.total) << ',' << rep.precondition_route << '\n';
  return 0;
}

int cmd_oracle(const CommonOptions& o) {
  const Problem p = make_problem(o);
  const Reward reward = reward_of(o);
  const OracleRun run = run_oracle(p.base, reward, o.trunc, o.horizon, oracle_gamma(p));
  const BiasBounds bias = choose_bias(o, p, &run.bias);
  const ErrorBoundReport eb = error_bound(p.base, *p.walk, bias);
  const PerturbedWalk& w = *p.walk;
  const ConditionCheck cond = check_conditions(
      run.bias, [&](State s, Direction d) { return p.base.rate(s, d); },
      [&](State s, Direction d) { return w.rate(s, d); }, bias, o.trunc / 2);
  const VerificationReport rep = compare_with_oracle(run, w.pi_bar(), reward, eb.total, cond, false);
  std::ofstream file;
  std::ostream& os = output(o, file);
  os << VerificationReport::csv_header() << '\n' << rep.csv_row() << '\n';
  if (!rep.passed) {
    std::cerr << "bound violated: margin " << fmt(rep.margin) << '\n';
    return kExitViolated;
  }
  return 0;
}

int cmd_sweep(const CommonOptions& o, const std::string& mode, int threads) {
  SweepOptions opt;
  opt.mode = mode == "load" ? SweepMode::Load : SweepMode::Eta;
  opt.reward = o.reward == "n1" ? RewardKind::N1 : RewardKind::Empty;
  opt.N = o.trunc;
  opt.T = o.horizon;
  opt.bias_degree = o.bias_degree >= 0 ? o.bias_degree : 1;
  opt.constraint_window = o.constraint_window;
  opt.threads = threads;
  const auto rows = run_sweep(opt);
  std::ofstream file;
  std::ostream& os = output(o, file);
  os << sweep_csv_header() << '\n';
  bool violated = false;
  for (const auto& r : rows) {
    os << sweep_csv_row(r) << '\n';
    violated = violated || !r.bound_ok;
  }
  return violated ? kExitViolated : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Error bounds for inhomogeneously perturbed quarter-plane random walks"};
  app.require_subcommand(1);
  CommonOptions opts;
  std::string mode = "eta";
  int threads = 0;

  auto* curves = app.add_subcommand("curves", "Sample the characteristic curves and mark intersections");
  auto* perturb = app.add_subcommand("perturb", "Construct the perturbed walk and list its axis rates");
  auto* bound = app.add_subcommand("bound", "Evaluate the error bound");
  auto* oracle = app.add_subcommand("oracle", "Verify the error bound against the truncated chain");
  auto* sweep = app.add_subcommand("sweep", "Compare homogeneous and inhomogeneous bounds on a grid");
  for (auto* sub : {curves, perturb, bound, oracle, sweep}) add_common(sub, opts);
  sweep->add_option("--mode", mode, "Sweep over load or eta")
      ->check(CLI::IsMember({"load", "eta"}))
      ->capture_default_str();
  sweep->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (curves->parsed()) return cmd_curves(opts);
    if (perturb->parsed()) return cmd_perturb(opts);
    if (bound->parsed()) return cmd_bound(opts);
    if (oracle->parsed()) return cmd_oracle(opts);
    if (sweep->parsed()) return cmd_sweep(opts, mode, threads);
  } catch (const BoundViolated& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitViolated;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const SingularSystem& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NotConverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
