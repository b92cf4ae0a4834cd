#include "swing/experiments.hpp"

#include "swing/convex_order.hpp"
#include "swing/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace swing {

namespace {

GridEngineConfig grid_config(const ExperimentConfig& cfg, BangBang bb) {
  GridEngineConfig g;
  g.m = cfg.solver.m;
  g.quad_nodes = cfg.quad_nodes;
  g.x_grid = cfg.x_grid;
  g.bang_bang = bb;
  g.delta_q = cfg.q_step;
  return g;
}

// Endpoint-vs-enumeration oracle on the scenario contract, run on the
// deterministic zero-volatility price state so ties are exact.
bool bang_bang_validated(const ContractSpec& contract, const VolumeGrid& volumes, double f0) {
  StateModel1D state = price_state_model([](double, double) { return 0.0; }, f0);
  GridEngineConfig cfg;
  cfg.x_grid.automatic = false;
  cfg.x_grid.lo = 0.5 * f0;
  cfg.x_grid.hi = 1.5 * f0;
  cfg.x_grid.points = 41;
  cfg.quad_nodes = 8;
  const BangBangReport rep = bang_bang_vs_enumeration(state, contract, volumes, cfg);
  return rep.max_discrepancy <= 1e-12 * (1.0 + std::abs(f0));
}

BangBang resolve_bang_bang(const ExperimentConfig& cfg, const ContractSpec& contract,
                           const VolumeGrid& volumes) {
  if (!cfg.bang_bang_verify) return cfg.bang_bang;
  return bang_bang_validated(contract, volumes, cfg.model.f0) ? BangBang::On : BangBang::Off;
}

}  // namespace

std::vector<SweepRow> run_sweep_scenario(const ExperimentConfig& config,
                                         const Scenario& scenario) {
  const ContractSpec contract = config.contract_for(scenario);
  ModelSpec model = config.model_for(scenario);
  const VolumeGrid volumes = build_volume_grid(contract, config.q_step);
  const BangBang bb = resolve_bang_bang(config, contract, volumes);
  const std::vector<double> pts = config.sweep.points();

  std::vector<SweepRow> rows;
  rows.reserve(pts.size());

  if (config.engine == EngineKind::Grid) {
    if (model.factor_count != 1)
      throw ConfigError("scenario '" + scenario.name + "': grid engine needs a one-factor model");
    if (contract.payoff == PayoffKind::IndexedStrike)
      throw ConfigError("scenario '" + scenario.name +
                        "': indexed strike needs the lsmc engine");
    const GridEngineConfig gcfg = grid_config(config, bb);
    for (double f0 : pts) {
      ModelSpec m2 = model;
      m2.f0 = f0;
      m2.f0_times.clear();
      m2.f0_values.clear();
      const StateModel1D state = factor_state_model(m2, contract);
      const ValueSurface surf = solve_grid_1d(state, contract, volumes, gcfg);
      const PricingResult pr = price(surf, state, contract, volumes, gcfg);
      rows.push_back({f0, pr.price, pr.delta, 0.0});
    }
  } else {
    LsmcConfig lcfg;
    lcfg.basis_degree = config.basis_degree;
    lcfg.bang_bang = bb;
    for (double f0 : pts) {
      ModelSpec m2 = model;
      m2.f0 = f0;
      m2.f0_times.clear();
      m2.f0_values.clear();
      const LsmcSurface surf = solve_lsmc(m2, contract, volumes, config.solver, lcfg);
      const PricingResult pr = price(surf, m2, contract, volumes, config.solver, lcfg);
      rows.push_back({f0, pr.price, pr.delta, pr.std_error});
    }
  }
  return rows;
}

std::string csv_text(const std::vector<SweepRow>& rows) {
  std::string out = "f0,price,delta\n";
  char line[128];
  for (const SweepRow& r : rows) {
    std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g\n", r.f0, r.price, r.delta);
    out += line;
  }
  return out;
}

std::vector<std::string> run_sweep(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  config.validate();
  fs::create_directories(config.out_dir);

  std::vector<std::string> written;
  for (const Scenario& s : config.scenarios) {
    std::vector<SweepRow> rows;
    try {
      rows = run_sweep_scenario(config, s);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw NumericalError("scenario '" + s.name + "': " + e.what());
    }
    const fs::path target = fs::path(config.out_dir) / (s.name + ".csv");
    const fs::path tmp = fs::path(config.out_dir) / (s.name + ".csv.tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw NumericalError("cannot write " + tmp.string());
      out << csv_text(rows);
    }
    fs::rename(tmp, target);
    written.push_back(target.string());
  }
  return written;
}

std::vector<std::string> run_penalty_experiment(const ExperimentConfig& config) {
  ExperimentConfig pen = config;
  pen.contract.mode = ConstraintMode::Pen;
  for (Scenario& s : pen.scenarios)
    if (!s.mode) s.mode = ConstraintMode::Pen;
  pen.validate();
  return run_sweep(pen);
}

bool VerificationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string VerificationReport::to_text() const {
  std::string out;
  char line[256];
  for (const CheckResult& c : checks) {
    std::snprintf(line, sizeof(line), "%-28s %s  worst=%-12.4g %s\n", c.name.c_str(),
                  c.pass ? "PASS" : "FAIL", c.worst, c.witness.c_str());
    out += line;
  }
  return out;
}

namespace {

CheckResult check_cholesky_identity() {
  CheckResult c{"cholesky_identity", true, 0.0, ""};
  for (int q = 2; q <= 10; ++q) {
    const double lo = -1.0 / (q - 1) + 0.01;
    for (int i = 0; i < 20; ++i) {
      const double rho = lo + (0.99 - lo) * i / 19.0;
      const Eigen::MatrixXd L = cholesky_explicit(rho, q);
      const double err = (L * L.transpose() - gamma_matrix(rho, q)).cwiseAbs().maxCoeff();
      if (err > c.worst) {
        c.worst = err;
        char w[64];
        std::snprintf(w, sizeof(w), "(q=%d, rho=%.4f)", q, rho);
        c.witness = w;
      }
    }
  }
  c.pass = c.worst <= 1e-12;
  return c;
}

CheckResult check_field_convexity(const ExperimentConfig& cfg) {
  const ContractSpec& contract = cfg.contract;
  std::vector<double> times(contract.n_exercise + 1);
  for (int k = 0; k <= contract.n_exercise; ++k) times[k] = contract.exercise_time(k);
  const VolField field = vol_field_multifactor(cfg.model, contract.maturity, times);

  std::vector<double> xs, lams{0.25, 0.5, 0.75};
  for (int i = 0; i <= 8; ++i) xs.push_back(cfg.model.f0 * (0.2 + 1.8 * i / 8.0));
  const OrderVerdict v = check_matrix_field_convexity(field, xs, lams, 1e-10);
  return {"field_convexity", v.holds(), v.worst_violation, v.witness};
}

CheckResult check_rho_monotonicity(const ExperimentConfig& cfg) {
  const int q = cfg.model.factor_count;
  if (q < 2) return {"rho_order_monotonicity", true, 0.0, "single factor: no correlation"};

  const ContractSpec& contract = cfg.contract;
  std::vector<double> times(contract.n_exercise + 1);
  for (int k = 0; k <= contract.n_exercise; ++k) times[k] = contract.exercise_time(k);

  CheckResult c{"rho_order_monotonicity", true, 0.0, ""};
  const double lo = -1.0 / (q - 1) + 0.02;
  std::vector<double> rhos{lo, 0.0, 0.2, 0.5, 0.8};
  for (std::size_t i = 0; i + 1 < rhos.size(); ++i) {
    ModelSpec m1 = cfg.model;
    ModelSpec m2 = cfg.model;
    m1.rho = rhos[i];
    m2.rho = rhos[i + 1];
    const VolField f1 = vol_field_multifactor(m1, contract.maturity, times);
    const VolField f2 = vol_field_multifactor(m2, contract.maturity, times);
    for (double x : {0.5 * cfg.model.f0, cfg.model.f0, 1.5 * cfg.model.f0}) {
      const OrderVerdict v =
          psd_order(f1.step_matrix(0, x), f2.step_matrix(0, x), 1e-12);
      if (v.worst_violation > c.worst) {
        c.worst = v.worst_violation;
        char w[96];
        std::snprintf(w, sizeof(w), "(rho %.2f vs %.2f at x=%.3g)", rhos[i], rhos[i + 1], x);
        c.witness = w;
      }
      if (!v.holds()) c.pass = false;
    }
  }
  return c;
}

CheckResult check_price_convexity(const ExperimentConfig& cfg) {
  CheckResult c{"price_convexity_in_f0", true, 0.0, ""};
  for (const Scenario& s : cfg.scenarios) {
    const std::vector<SweepRow> rows = run_sweep_scenario(cfg, s);
    if (rows.size() < 3) continue;
    double scale = 0.0;
    for (const SweepRow& r : rows) scale = std::max(scale, std::abs(r.price));
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
      const double dd = rows[i - 1].price - 2.0 * rows[i].price + rows[i + 1].price;
      const double tol =
          cfg.engine == EngineKind::Grid
              ? 1e-6 * std::max(scale, 1.0)
              : 6.0 * std::sqrt(rows[i - 1].std_error * rows[i - 1].std_error +
                                4.0 * rows[i].std_error * rows[i].std_error +
                                rows[i + 1].std_error * rows[i + 1].std_error);
      if (-dd > tol && -dd > c.worst) {
        c.worst = -dd;
        char w[96];
        std::snprintf(w, sizeof(w), "scenario '%s' at f0=%.3g", s.name.c_str(), rows[i].f0);
        c.witness = w;
        c.pass = false;
      }
    }
  }
  return c;
}

GridEngineConfig price_state_grid_config(const ExperimentConfig& cfg) {
  GridEngineConfig g;
  g.m = cfg.solver.m;
  g.quad_nodes = cfg.quad_nodes;
  g.x_grid.automatic = false;
  g.x_grid.lo = 0.0;
  g.x_grid.hi = 3.0 * std::max(cfg.model.f0, cfg.contract.strike);
  g.x_grid.points = 301;
  g.delta_q = cfg.q_step;
  return g;
}

CheckResult check_domination(const ExperimentConfig& cfg) {
  ContractSpec contract = cfg.contract;
  if (contract.payoff == PayoffKind::IndexedStrike) contract.payoff = PayoffKind::FixedStrike;
  const VolumeGrid volumes = build_volume_grid(contract, cfg.q_step);
  const double alpha = cfg.model.mean_reversions[0];
  const double T = contract.maturity;
  auto scale = [alpha, T](double t) { return std::exp(-alpha * (T - t)); };

  const GridEngineConfig gcfg = price_state_grid_config(cfg);
  StateModel1D lo_state = price_state_model(
      [scale](double t, double x) { return 0.2 * x * scale(t); }, cfg.model.f0);
  StateModel1D hi_state = price_state_model(
      [scale](double t, double x) { return 0.7 * x * scale(t); }, cfg.model.f0);

  const ValueSurface lo = solve_grid_1d(lo_state, contract, volumes, gcfg);
  const ValueSurface hi = solve_grid_1d(hi_state, contract, volumes, gcfg);

  CheckResult c{"domination_criterion", true, 0.0, ""};
  for (int k = 0; k <= lo.n_dates; ++k) {
    for (int qi = 0; qi < lo.q_count(k); ++qi) {
      for (std::size_t i = 0; i < lo.x_grid.size(); ++i) {
        const double gap = lo.values[k](i, qi) - hi.values[k](i, qi);
        if (gap > c.worst) {
          c.worst = gap;
          char w[96];
          std::snprintf(w, sizeof(w), "(k=%d, Q=%.0f, x=%.3g)", k, lo.q_value(k, qi),
                        lo.x_grid[i]);
          c.witness = w;
        }
      }
    }
  }
  c.pass = c.worst <= 1e-8;
  return c;
}

// Pinned scheme-level study instance. The Lipschitz constant is chosen so the
// thresholds s_h sit in the 1.7..4.9 sigma range over m = 2..16: truncation
// fires often enough to measure at every m yet never freezes the scheme, so
// the coupled gap tracks the removed tail variance.
Diffusion1D gap_study_dynamics() {
  Diffusion1D dyn;
  dyn.sigma = [](double t, double x) { return 0.8 * x * std::exp(-0.4 * (1.0 - t)); };
  dyn.sigma_lip = 0.8;
  dyn.a_sigma = 0.0;
  return dyn;
}

inline constexpr double kGapRatioBound = 4.0;

CheckResult check_truncated_gap(const ExperimentConfig& cfg) {
  SchemeConfig base;
  base.path_count = std::min(cfg.solver.path_count, 20000);
  base.seed = cfg.solver.seed;
  base.truncation_lambda = cfg.solver.truncation_lambda.value_or(0.25);
  const std::vector<int> ms{2, 4, 8, 16};
  const GapStudyResult res =
      truncated_plain_gap(gap_study_dynamics(), 1.0, 15, ms, -3.0, 3.0, 7, 2.0, base);

  CheckResult c{"truncated_gap_decay", true, 0.0, ""};
  for (std::size_t i = 0; i + 1 < res.sup_gap.size(); ++i) {
    if (!(res.sup_gap[i + 1] < res.sup_gap[i])) {
      c.pass = false;
      char w[96];
      std::snprintf(w, sizeof(w), "gap(m=%d)=%.4g !> gap(m=%d)=%.4g", res.ms[i], res.sup_gap[i],
                    res.ms[i + 1], res.sup_gap[i + 1]);
      c.witness = w;
    }
  }
  c.worst = res.max_ratio;
  if (res.max_ratio > kGapRatioBound) {
    c.pass = false;
    c.witness += " ratio bound exceeded";
  }
  if (c.pass) {
    char w[96];
    std::snprintf(w, sizeof(w), "gaps %.3g..%.3g, ratio<=%.3g", res.sup_gap.front(),
                  res.sup_gap.back(), res.max_ratio);
    c.witness = w;
  }
  return c;
}

CheckResult check_truncated_stein() {
  const double x = 1.0, h = 0.01, lambda = 0.25;
  const double sigma_x = 0.2 * x;
  const double s_h = truncation_threshold(h, 0.2, 0.0, lambda);
  const double r1 = truncated_stein_residual([](double y) { return 2.0 * y; },
                                             [](double) { return 2.0; }, x, h, sigma_x, s_h);
  const double r2 = truncated_stein_residual(
      [](double y) { return 0.25 * std::exp(0.25 * y); },
      [](double y) { return 0.0625 * std::exp(0.25 * y); }, x, h, sigma_x, s_h);
  CheckResult c{"truncated_stein_identity", r1 <= 1e-8 && r2 <= 1e-6, std::max(r1, r2), ""};
  char w[96];
  std::snprintf(w, sizeof(w), "residuals %.3g (y^2), %.3g (exp(y/4))", r1, r2);
  c.witness = w;
  return c;
}

CheckResult check_lipschitz_chain(const ExperimentConfig& cfg) {
  ContractSpec contract = cfg.contract;
  if (contract.payoff == PayoffKind::IndexedStrike) contract.payoff = PayoffKind::FixedStrike;
  const VolumeGrid volumes = build_volume_grid(contract, cfg.q_step);
  const double alpha = cfg.model.mean_reversions[0];
  const double T = contract.maturity;
  const double sig_scale = 0.2;
  auto field = [alpha, T, sig_scale](double t, double x) {
    return sig_scale * x * std::exp(-alpha * (T - t));
  };

  const GridEngineConfig gcfg = price_state_grid_config(cfg);
  const StateModel1D state = price_state_model(field, cfg.model.f0);
  const ValueSurface surf = solve_grid_1d(state, contract, volumes, gcfg);

  const int n = contract.n_exercise;
  const double h = T / (gcfg.m * n);
  const double dx = surf.x_grid[1] - surf.x_grid[0];
  std::vector<double> payoff_lips(n, contract.q_max);
  double penalty_lip = 0.0;
  if (contract.mode == ConstraintMode::Pen)
    penalty_lip = std::max(contract.penalty_a * contract.Q_min,
                           contract.penalty_b * (n * contract.q_max - contract.Q_max));

  CheckResult c{"lipschitz_chain_bound", true, 0.0, ""};
  for (int k = 0; k <= n; ++k) {
    const LipschitzChainBound bound =
        lipschitz_chain_bound(k, gcfg.m, h, 0.0, sig_scale, payoff_lips, penalty_lip);
    for (std::size_t i = 0; i < bound.step_powers.size(); ++i) {
      if (bound.step_powers[i] > bound.exp_envelope[i] * (1.0 + 1e-12)) {
        c.pass = false;
        c.witness = "power exceeded exponential envelope";
      }
    }
    double slope = 0.0;
    for (int qi = 0; qi < surf.q_count(k); ++qi)
      for (std::size_t i = 0; i + 1 < surf.x_grid.size(); ++i)
        slope = std::max(slope,
                         std::abs(surf.values[k](i + 1, qi) - surf.values[k](i, qi)) / dx);
    const double excess = slope - bound.bound;
    if (excess > c.worst) {
      c.worst = excess;
      char w[96];
      std::snprintf(w, sizeof(w), "k=%d slope %.4g vs bound %.4g", k, slope, bound.bound);
      c.witness = w;
    }
    if (excess > 1e-9 * (1.0 + bound.bound)) c.pass = false;
  }
  return c;
}

CheckResult check_bang_bang_oracle() {
  ContractSpec small;
  small.n_exercise = 5;
  small.maturity = 5.0 / 365.0;
  small.q_max = 2;
  small.Q_min = 4;
  small.Q_max = 8;
  small.strike = 20.0;
  small.penalty_a = 0.25;
  small.penalty_b = 0.25;

  CheckResult c{"bang_bang_oracle", true, 0.0, "fixed, call, pen all exact"};
  struct Case {
    PayoffKind payoff;
    ConstraintMode mode;
    const char* tag;
  };
  const Case cases[] = {{PayoffKind::FixedStrike, ConstraintMode::Firm, "fixed"},
                        {PayoffKind::Call, ConstraintMode::Firm, "call"},
                        {PayoffKind::FixedStrike, ConstraintMode::Pen, "pen"}};
  for (const Case& cs : cases) {
    ContractSpec contract = small;
    contract.payoff = cs.payoff;
    contract.mode = cs.mode;
    const VolumeGrid volumes = build_volume_grid(contract, 1.0);
    StateModel1D state = price_state_model([](double, double) { return 0.0; }, 20.0);
    GridEngineConfig cfg;
    cfg.x_grid.automatic = false;
    cfg.x_grid.lo = 10.0;
    cfg.x_grid.hi = 30.0;
    cfg.x_grid.points = 41;
    cfg.quad_nodes = 8;
    const BangBangReport rep = bang_bang_vs_enumeration(state, contract, volumes, cfg);
    if (rep.max_discrepancy > c.worst) {
      c.worst = rep.max_discrepancy;
      char w[96];
      std::snprintf(w, sizeof(w), "%s payoff: max gap %.3g at k=%d", cs.tag, rep.max_discrepancy,
                    rep.worst_date);
      c.witness = w;
    }
    if (rep.max_discrepancy != 0.0) c.pass = false;
  }
  if (c.pass) c.witness = "fixed, call, pen exact on the reachable lattice";
  return c;
}

}  // namespace

VerificationReport run_verification_suite(const ExperimentConfig& config) {
  config.validate();
  VerificationReport rep;
  rep.checks.push_back(check_cholesky_identity());
  rep.checks.push_back(check_field_convexity(config));
  rep.checks.push_back(check_rho_monotonicity(config));
  rep.checks.push_back(check_price_convexity(config));
  rep.checks.push_back(check_domination(config));
  rep.checks.push_back(check_truncated_gap(config));
  rep.checks.push_back(check_truncated_stein());
  rep.checks.push_back(check_lipschitz_chain(config));
  rep.checks.push_back(check_bang_bang_oracle());
  return rep;
}

}  // namespace swing
