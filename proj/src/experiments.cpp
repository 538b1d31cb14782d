#include "qpbound/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace qpb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  return f;
}

double grid_rho(int k, int samples) { return (k + 1.0) / (samples + 1.0); }

}  // namespace

// ---------------------------------------------------------------------------

void JointDeparturesConfig::validate() const {
  if (!(lambda > 0.0 && mu > 0.0 && mu_star > 0.0))
    throw DomainError("joint-departures rates must be positive");
  if (std::abs(2.0 * lambda + mu - 1.0) > 1e-12)
    throw DomainError("joint-departures model needs 2 lambda + mu = 1");
  if (!(mu_star < mu)) throw DomainError("joint-departures model needs mu* < mu");
}

bool JointDeparturesConfig::valid() const {
  try {
    validate();
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

JointDeparturesConfig JointDeparturesConfig::from_eta(double lambda, double mu, double eta) {
  return {lambda, mu, eta * mu};
}

JointDeparturesConfig JointDeparturesConfig::from_load(double load, double eta) {
  const double mu = 1.0 / (1.0 + 2.0 * load);
  return {load * mu, mu, eta * mu};
}

// ---------------------------------------------------------------------------

std::vector<QCurveSample> sample_Q(const RandomWalk& walk, int samples) {
  std::vector<QCurveSample> out;
  for (int k = 0; k < samples; ++k) {
    const double rho = grid_rho(k, samples);
    const auto roots = q_sigma_branches(walk, rho);
    QCurveSample s{rho, kNaN, kNaN};
    if (!roots.empty()) s.branch1 = roots.front();
    if (roots.size() > 1) s.branch2 = roots.back();
    out.push_back(s);
  }
  return out;
}

std::vector<CurveSample> sample_boundary_curve(Curve curve, const RandomWalk& walk, int samples) {
  constexpr double a = 0.25, b = 0.75;
  std::vector<CurveSample> out;
  for (int k = 0; k < samples; ++k) {
    const double x = grid_rho(k, samples);
    double root = kNaN;
    if (curve == Curve::H) {
      const double ra = curve_residual_H(walk, x, a), rb = curve_residual_H(walk, x, b);
      if (ra != rb) root = a - ra * (b - a) / (rb - ra);
      out.push_back({x, root > 0.0 && root < 1.0 ? root : kNaN});
    } else {
      const double ra = curve_residual_V(walk, a, x), rb = curve_residual_V(walk, b, x);
      if (ra != rb) root = a - ra * (b - a) / (rb - ra);
      // V is parametrised by sigma; report (rho, sigma).
      if (root > 0.0 && root < 1.0) out.push_back({root, x});
    }
  }
  return out;
}

RandomWalk homogeneous_walk(const JointDeparturesConfig& cfg) {
  return joint_departures_walk(cfg.lambda, cfg.mu, cfg.mu / 2.0);
}

GeometricSum homogeneous_pi(const JointDeparturesConfig& cfg) {
  const double r = product_form_rho(cfg.lambda, cfg.mu);
  return normalize({GeometricTerm{r, r, 1.0}});
}

GeometricSum two_term_pi(const JointDeparturesConfig& cfg) {
  const RandomWalk walk = joint_departures_walk(cfg.lambda, cfg.mu, cfg.mu_star);
  const CurvePoint h = intersect_Q_with(Curve::H, walk).front();
  const CurvePoint v = intersect_Q_with(Curve::V, walk).front();
  return normalize({GeometricTerm{h.rho, h.sigma, 1.0}, GeometricTerm{v.rho, v.sigma, 1.0}});
}

std::vector<MarkedPoint> marked_points(const JointDeparturesConfig& cfg) {
  const RandomWalk walk = joint_departures_walk(cfg.lambda, cfg.mu, cfg.mu_star);
  std::vector<MarkedPoint> out;
  for (const auto& p : intersect_Q_with(Curve::H, walk)) out.push_back({"Q_cap_H", p.rho, p.sigma});
  for (const auto& p : intersect_Q_with(Curve::V, walk)) out.push_back({"Q_cap_V", p.rho, p.sigma});
  const double r = product_form_rho(cfg.lambda, cfg.mu);
  out.push_back({"product_form", r, r});
  return out;
}

std::vector<MarkedPoint> run_curves(const JointDeparturesConfig& cfg, const std::string& out_dir,
                                    int samples) {
  cfg.validate();
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  const RandomWalk walk = joint_departures_walk(cfg.lambda, cfg.mu, cfg.mu_star);
  const RandomWalk hom = homogeneous_walk(cfg);
  const auto points = marked_points(cfg);

  {
    auto f = open_csv(dir / "allcurves_data_int.csv");
    f << "rho,sigma_Q_branch1,sigma_Q_branch2\n";
    for (const auto& s : sample_Q(walk, samples))
      f << num(s.rho) << ',' << num(s.branch1) << ',' << num(s.branch2) << '\n';
  }
  const auto write_curve = [&](const std::string& name, Curve c, const RandomWalk& w) {
    auto f = open_csv(dir / name);
    f << "rho,sigma\n";
    for (const auto& s : sample_boundary_curve(c, w, samples))
      f << num(s.rho) << ',' << num(s.sigma) << '\n';
  };
  write_curve("allcurves_data_hor.csv", Curve::H, walk);
  write_curve("allcurves_data_ver.csv", Curve::V, walk);
  write_curve("allcurves_data_prod_hor.csv", Curve::H, hom);
  write_curve("allcurves_data_prod_ver.csv", Curve::V, hom);
  {
    auto f = open_csv(dir / "marked_points.csv");
    f << "label,rho,sigma\n";
    for (const auto& p : points) f << p.label << ',' << num(p.rho) << ',' << num(p.sigma) << '\n';
  }
  return points;
}

// ---------------------------------------------------------------------------

InhomogeneousSetup inhomogeneous_perturbation(const JointDeparturesConfig& cfg) {
  const RandomWalk base = joint_departures_walk(cfg.lambda, cfg.mu, cfg.mu_star);
  const GeometricSum pi = two_term_pi(cfg);
  PerturbedWalk walk = build_perturbation(base, pi, cfg.lambda, cfg.lambda);
  if (check_thresholds(walk).holds) return {std::move(walk), "ok"};
  const Thresholds th = thresholds(base, pi);
  return {build_perturbation(base, pi, std::max(cfg.lambda, th.h_min),
                             std::max(cfg.lambda, th.v_min)),
          "threshold_raised"};
}

Reward make_reward(RewardKind kind) {
  return kind == RewardKind::Empty ? Reward{OriginIndicator{}} : first_queue_length();
}

std::vector<double> default_grid(SweepMode mode) {
  std::vector<double> g;
  if (mode == SweepMode::Eta) {
    for (int k = 7; k <= 19; ++k) g.push_back(k * 0.05);
  } else {
    for (int k = 1; k <= 8; ++k) g.push_back(k * 0.05);
  }
  return g;
}

SweepRow evaluate_point(double x, int index, const SweepOptions& opt) {
  SweepRow row;
  row.index = index;
  row.x = x;
  const JointDeparturesConfig cfg = opt.mode == SweepMode::Eta
                                        ? JointDeparturesConfig::from_eta(0.2, 0.6, x)
                                        : JointDeparturesConfig::from_load(x);
  row.lambda = cfg.lambda;
  row.mu = cfg.mu;
  row.mu_star = cfg.mu_star;
  row.bound_inhom = row.bound_hom = row.F_bar = row.F_bar_hom = row.F_oracle = kNaN;
  row.allowance = row.h_bar_10 = row.margin_inhom = row.margin_hom = kNaN;
  row.bound_hom_closed = kNaN;
  row.bound_ok = true;

  if (!cfg.valid()) {
    row.status = "invalid_config";
    return row;
  }
  if (opt.mode == SweepMode::Load && opt.reward == RewardKind::N1 && x > 0.4 + 1e-12) {
    row.status = "paper_infeasible_regime";
    return row;
  }

  try {
    const Reward reward = make_reward(opt.reward);
    const RandomWalk base = joint_departures_walk(cfg.lambda, cfg.mu, cfg.mu_star);
    const RandomWalk hom = homogeneous_walk(cfg);
    const GeometricSum pi_hom = homogeneous_pi(cfg);
    InhomogeneousSetup inhom = inhomogeneous_perturbation(cfg);
    const PerturbedWalk& walk = inhom.walk;
    row.status = inhom.status;
    row.h_bar_10 = walk.params().h_bar_10;

    const double gamma_u = std::max({base.gamma(), hom.gamma(), walk.gamma_bar()});
    const OracleRun run = run_oracle(base, reward, opt.N, opt.T, gamma_u);

    BiasBounds bias_inhom, bias_hom;
    if (opt.reward == RewardKind::Empty) {
      const double B = empty_system_bias_constant(cfg.mu, cfg.mu_star);
      bias_inhom = bias_hom = BiasBounds::constant(B, B, B);
      row.bound_inhom = error_bound(base, walk, bias_inhom).total;
      row.bound_hom = homogeneous_error_bound(base, hom, pi_hom, bias_hom).total;
      row.bound_hom_closed = homogeneous_bound_joint_departures(cfg.lambda, cfg.mu, cfg.mu_star);
    } else {
      const int M = opt.bias_degree;
      const BiasLpSolution lp_inhom =
          solve(assemble(base, walk, run.bias, M, opt.constraint_window));
      const BiasLpSolution lp_hom = solve(assemble(
          homogeneous_bound_coefficients(base, hom, pi_hom, M), run.bias, M, opt.constraint_window));
      bias_inhom = lp_inhom.bounds;
      bias_hom = lp_hom.bounds;
      row.bound_inhom = error_bound(base, walk, bias_inhom).total;
      row.bound_hom = homogeneous_error_bound(base, hom, pi_hom, bias_hom).total;
    }

    const int window = opt.N / 2;
    const RateFunction original = [&](State s, Direction d) { return base.rate(s, d); };
    const ConditionCheck cond_inhom = check_conditions(
        run.bias, original, [&](State s, Direction d) { return walk.rate(s, d); }, bias_inhom,
        window);
    const ConditionCheck cond_hom = check_conditions(
        run.bias, original, [&](State s, Direction d) { return hom.rate(s, d); }, bias_hom, window);

    const VerificationReport rep_inhom =
        compare_with_oracle(run, walk.pi_bar(), reward, row.bound_inhom, cond_inhom, false);
    const VerificationReport rep_hom =
        compare_with_oracle(run, pi_hom, reward, row.bound_hom, cond_hom, false);

    row.F_bar = rep_inhom.F_bar;
    row.F_bar_hom = rep_hom.F_bar;
    row.F_oracle = run.F_oracle;
    row.allowance = rep_inhom.allowance;
    row.margin_inhom = rep_inhom.margin;
    row.margin_hom = rep_hom.margin;
    row.conditions_inhom = cond_inhom.holds;
    row.conditions_hom = cond_hom.holds;
    row.bound_ok = rep_inhom.passed && rep_hom.passed;
    row.verified = row.bound_ok && cond_inhom.holds && cond_hom.holds;
    if (!row.bound_ok) row.status = "bound_violated";
    else if (!row.verified) row.status = "conditions_unverified";
  } catch (const ThresholdViolated&) {
    row.status = "threshold_violated";
  } catch (const Infeasible&) {
    row.status = "lp_infeasible";
  } catch (const Error& e) {
    row.status = std::string("error: ") + e.what();
    std::replace(row.status.begin(), row.status.end(), ',', ';');
  }
  return row;
}

std::vector<SweepRow> run_sweep(const SweepOptions& options) {
  const std::vector<double> grid = options.grid.empty() ? default_grid(options.mode) : options.grid;
  std::vector<SweepRow> rows(grid.size());
  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(grid.size(), 1)));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < grid.size(); k = next++)
      rows[k] = evaluate_point(grid[k], static_cast<int>(k), options);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return rows;
}

std::string sweep_csv_header() {
  return "x,bound_inhom,bound_hom,F_bar,F_oracle,verified,lambda,mu,mu_star,F_bar_hom,allowance,"
         "h_bar_10,margin_inhom,margin_hom,conditions_inhom,conditions_hom,bound_hom_closed,status";
}

std::string sweep_csv_row(const SweepRow& r) {
  std::ostringstream os;
  os << num(r.x) << ',' << num(r.bound_inhom) << ',' << num(r.bound_hom) << ',' << num(r.F_bar)
     << ',' << num(r.F_oracle) << ',' << (r.verified ? "true" : "false") << ',' << num(r.lambda)
     << ',' << num(r.mu) << ',' << num(r.mu_star) << ',' << num(r.F_bar_hom) << ','
     << num(r.allowance) << ',' << num(r.h_bar_10) << ',' << num(r.margin_inhom) << ','
     << num(r.margin_hom) << ',' << (r.conditions_inhom ? "true" : "false") << ','
     << (r.conditions_hom ? "true" : "false") << ',' << num(r.bound_hom_closed) << ','
     << r.status;
  return os.str();
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << sweep_csv_header() << '\n';
  for (const auto& r : rows) f << sweep_csv_row(r) << '\n';
}

}  // namespace qpb
