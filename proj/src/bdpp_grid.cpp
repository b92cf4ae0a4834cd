#include "swing/bdpp.hpp"

#include "swing/errors.hpp"
#include "swing/rng.hpp"
#include "grid_ops.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace swing {

namespace {

using detail::SubstepOperator;
using detail::UniformGrid;

std::vector<int> contiguous_units(int lo, int hi) {
  std::vector<int> out(hi - lo + 1);
  for (int u = lo; u <= hi; ++u) out[u - lo] = u;
  return out;
}

}  // namespace

StateModel1D factor_state_model(const ModelSpec& model, const ContractSpec& contract) {
  model.validate();
  contract.validate();
  if (model.factor_count != 1)
    throw std::invalid_argument("factor_state_model: grid engine needs a one-factor model");

  const double alpha = model.mean_reversions[0];
  const double sig = model.vols[0];
  const int n = contract.n_exercise;
  const double T = contract.maturity;

  std::vector<double> f0(n + 1), half_lam2(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = contract.exercise_time(k);
    f0[k] = model.initial_forward(t);
    half_lam2[k] = 0.5 * lambda_sq(t, model);
  }

  StateModel1D s;
  s.kappa = [alpha](double) { return -alpha; };
  s.zeta = 0.0;
  s.sigma = [](double, double) { return 1.0; };
  s.spot = [sig, f0, half_lam2](int k, double x) {
    return f0[k] * std::exp(sig * x - half_lam2[k]);
  };
  s.forward0 = [f0](int k) { return f0[k]; };
  s.x0 = 0.0;
  s.exact_step = [alpha](double, double dt) {
    const double decay = std::exp(-alpha * dt);
    return StateModel1D::AffineStep{decay, 0.0,
                                    std::sqrt((1.0 - decay * decay) / (2.0 * alpha))};
  };
  s.state_std_at_maturity = std::sqrt((1.0 - std::exp(-2.0 * alpha * T)) / (2.0 * alpha));
  return s;
}

StateModel1D price_state_model(std::function<double(double, double)> sigma, double x0) {
  StateModel1D s;
  s.sigma = std::move(sigma);
  s.spot = [](int, double x) { return x; };
  s.forward0 = [x0](int) { return x0; };
  s.x0 = x0;
  s.state_std_at_maturity = 0.0;
  return s;
}

int ValueSurface::q_index(int k, int units) const {
  const auto& set = q_units[k];
  const auto it = std::lower_bound(set.begin(), set.end(), units);
  if (it == set.end() || *it != units) return -1;
  return static_cast<int>(it - set.begin());
}

double ValueSurface::value_at(int k, double Q, double x) const {
  const int units = static_cast<int>(std::lround(Q / delta_q));
  const int qi = q_index(k, units);
  if (qi < 0) throw std::invalid_argument("ValueSurface: Q not attainable at this date");
  const UniformGrid g = UniformGrid::from_points(x_grid);
  const auto col = values[k].col(qi);
  return detail::interp_linear(g, std::span<const double>(col.data(), g.n), x, nullptr);
}

namespace {

struct EngineSetup {
  UniformGrid grid;
  std::vector<SubstepOperator> ops;  // ops_per_date per exercise interval
  int ops_per_date = 1;
  std::string diagnostics;
};

EngineSetup build_setup(const StateModel1D& state, const ContractSpec& contract,
                        const GridEngineConfig& config) {
  EngineSetup s;
  const GridSpec& gs = config.x_grid;
  double lo = gs.lo, hi = gs.hi;
  int points = gs.points;
  if (gs.automatic) {
    if (!(state.state_std_at_maturity > 0.0))
      throw std::invalid_argument("solve_grid: automatic grid needs a state scale");
    const double span = gs.span_stds * state.state_std_at_maturity;
    lo = state.x0 - span;
    hi = state.x0 + span;
    if (points % 2 == 0) ++points;  // keep x0 on a node
  }
  if (!(hi > lo) || points < 3) throw std::invalid_argument("solve_grid: bad x grid");
  s.grid = UniformGrid{lo, (hi - lo) / (points - 1), points};

  if (state.state_std_at_maturity > 0.0) {
    const double tail = normal_cdf((lo - state.x0) / state.state_std_at_maturity) +
                        normal_cdf(-(hi - state.x0) / state.state_std_at_maturity);
    if (tail > 1e-6)
      s.diagnostics += "warning: terminal state mass beyond the x grid exceeds 1e-6\n";
  }

  const int n = contract.n_exercise;
  const double T = contract.maturity;

  if (config.transition == TransitionKind::ExactStep) {
    if (!state.exact_step)
      throw std::invalid_argument("solve_grid: exact transition requested but not available");
    s.ops_per_date = 1;
    const double dt = T / n;
    for (int k = 0; k < n; ++k) {
      const auto step = state.exact_step(contract.exercise_time(k), dt);
      std::vector<double> a(s.grid.n), b(s.grid.n, step.c);
      for (int i = 0; i < s.grid.n; ++i) a[i] = step.a * s.grid.x(i) + step.b;
      s.ops.emplace_back(s.grid, std::move(a), std::move(b), config.quad_nodes);
    }
  } else {
    s.ops_per_date = config.m;
    const int mn = config.m * n;
    const double h = T / mn;
    const double sqrt_h = std::sqrt(h);
    for (int l = 0; l < mn; ++l) {
      const double t = T * l / mn;
      const double kap = state.kappa ? state.kappa(t) : 0.0;
      std::vector<double> a(s.grid.n), b(s.grid.n);
      for (int i = 0; i < s.grid.n; ++i) {
        const double x = s.grid.x(i);
        a[i] = x + h * kap * (x - state.zeta);
        b[i] = sqrt_h * state.sigma(t, x);
      }
      s.ops.emplace_back(s.grid, std::move(a), std::move(b), config.quad_nodes);
    }
  }
  return s;
}

}  // namespace

ValueSurface solve_grid_1d(const StateModel1D& state, const ContractSpec& contract,
                           const VolumeGrid& volumes, const GridEngineConfig& config) {
  contract.validate();
  if (contract.payoff == PayoffKind::IndexedStrike)
    throw std::invalid_argument(
        "solve_grid: indexed strike is path dependent; use the regression engine");
  if (config.quad_nodes < 8) throw std::invalid_argument("solve_grid: quad_nodes must be >= 8");

  const EngineSetup setup = build_setup(state, contract, config);
  const int n = contract.n_exercise;
  const int nx = setup.grid.n;
  const double dq = volumes.delta_q();
  const bool par = config.exec == ExecPolicy::OpenMP;

  ValueSurface surf;
  surf.x_grid = setup.grid.points();
  surf.n_dates = n;
  surf.delta_q = dq;
  surf.m = config.transition == TransitionKind::ExactStep ? 1 : config.m;
  surf.engine = config.transition == TransitionKind::ExactStep ? "grid-exact" : "grid";
  surf.diagnostics = setup.diagnostics;
  surf.q_units.resize(n + 1);
  surf.values.resize(n + 1);
  surf.continuations.resize(n);
  surf.policy.resize(n);
  for (int k = 0; k <= n; ++k)
    surf.q_units[k] = contiguous_units(volumes.lower_units(k), volumes.upper_units(k));

  // terminal slice: the penalty
  {
    const auto& units = surf.q_units[n];
    Eigen::MatrixXd& vn = surf.values[n];
    vn.resize(nx, units.size());
    for (std::size_t qi = 0; qi < units.size(); ++qi) {
      const double Q = dq * units[qi];
      for (int i = 0; i < nx; ++i)
        vn(i, qi) = penalty_value(contract, state.spot(n, setup.grid.x(i)), Q);
    }
  }

  // per-date unit payoff coefficients psi_k(x) = payoff(1, spot)
  std::vector<Eigen::VectorXd> unit_pay(n);
  for (int k = 0; k < n; ++k) {
    unit_pay[k].resize(nx);
    for (int i = 0; i < nx; ++i)
      unit_pay[k](i) =
          payoff_value(contract.payoff, 1.0, state.spot(k, setup.grid.x(i)), contract.strike);
  }

  for (int k = n - 1; k >= 0; --k) {
    const auto& units_next = surf.q_units[k + 1];
    const auto& units_here = surf.q_units[k];
    const int base_next = units_next.front();
    const int p1 = static_cast<int>(units_next.size());
    const int p0 = static_cast<int>(units_here.size());

    // candidate controls per volume node, checked before entering the
    // parallel region
    std::vector<std::vector<int>> candidates(p0);
    for (int qi = 0; qi < p0; ++qi) {
      const auto range = volumes.admissible_units(k, units_here[qi]);
      if (range.empty())
        throw NumericalError("solve_grid: empty admissible control set on the firm lattice");
      if (config.bang_bang == BangBang::On) {
        candidates[qi].push_back(range.lo);
        if (range.hi != range.lo) candidates[qi].push_back(range.hi);
      } else {
        for (int u = range.lo; u <= range.hi; ++u) candidates[qi].push_back(u);
      }
    }

    // continuation: compose the sub-step operators over the interval
    Eigen::MatrixXd& cont = surf.continuations[k];
    cont.resize(nx, p1);
    std::vector<long> extrap(p1, 0);
#pragma omp parallel for schedule(static) if (par)
    for (int qi = 0; qi < p1; ++qi) {
      std::vector<double> cur(nx), nxt(nx);
      Eigen::Map<Eigen::VectorXd>(cur.data(), nx) = surf.values[k + 1].col(qi);
      for (int l = setup.ops_per_date - 1; l >= 0; --l) {
        setup.ops[k * setup.ops_per_date + l].apply(cur, nxt, &extrap[qi]);
        std::swap(cur, nxt);
      }
      cont.col(qi) = Eigen::Map<const Eigen::VectorXd>(cur.data(), nx);
    }
    for (long e : extrap) surf.extrapolation_hits += e;

    Eigen::MatrixXd& vk = surf.values[k];
    Eigen::MatrixXi& pol = surf.policy[k];
    vk.resize(nx, p0);
    pol.resize(nx, p0);
#pragma omp parallel for schedule(static) if (par)
    for (int qi = 0; qi < p0; ++qi) {
      const int Qu = units_here[qi];
      auto v_col = vk.col(qi);
      auto p_col = pol.col(qi);
      bool first = true;
      for (int u : candidates[qi]) {
        const double q = dq * u;
        const auto c_col = cont.col(Qu + u - base_next);
        if (first) {
          for (int i = 0; i < nx; ++i) {
            v_col(i) = q * unit_pay[k](i) + c_col(i);
            p_col(i) = u;
          }
          first = false;
        } else {
          for (int i = 0; i < nx; ++i) {
            const double cand = q * unit_pay[k](i) + c_col(i);
            if (cand > v_col(i)) {
              v_col(i) = cand;
              p_col(i) = u;
            }
          }
        }
      }
    }
  }
  return surf;
}

ValueSurface solve_grid(const ModelSpec& model, const ContractSpec& contract,
                        const VolumeGrid& volumes, const GridEngineConfig& config) {
  return solve_grid_1d(factor_state_model(model, contract), contract, volumes, config);
}

PricingResult price(const ValueSurface& surface, const StateModel1D& state,
                    const ContractSpec& contract, const VolumeGrid& volumes,
                    const GridEngineConfig& config) {
  (void)volumes;
  const EngineSetup setup = build_setup(state, contract, config);
  const UniformGrid& g = setup.grid;
  if (static_cast<int>(surface.x_grid.size()) != g.n)
    throw std::invalid_argument("price: surface grid does not match the engine configuration");
  const int n = surface.n_dates;
  const int nx = g.n;
  const double dq = surface.delta_q;
  const bool par = config.exec == ExecPolicy::OpenMP;

  PricingResult res;
  res.extrapolation_hits = surface.extrapolation_hits;

  // v_0 read at (x0, Q = 0)
  {
    const auto col0 = surface.values[0].col(surface.q_index(0, 0));
    res.price = detail::interp_linear(g, std::span<const double>(col0.data(), nx), state.x0,
                                      nullptr);
    double worst = 0.0;
    for (int i = 1; i + 1 < nx; ++i)
      worst = std::min(worst, col0(i - 1) - 2.0 * col0(i) + col0(i + 1));
    res.convexity_violation = -worst;
  }

  // forward transport of the state distribution under the optimal policy
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(nx, surface.q_count(0));
  {
    const detail::Deposit d = detail::deposit_linear(g, state.x0);
    mu(d.i0, surface.q_index(0, 0)) += d.w0;
    mu(d.i1, surface.q_index(0, 0)) += d.w1;
  }

  double cash = 0.0, delta = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto& units_here = surface.q_units[k];
    const auto& units_next = surface.q_units[k + 1];
    const int base_next = units_next.front();
    Eigen::MatrixXd moved = Eigen::MatrixXd::Zero(nx, units_next.size());
    const double f0k = state.forward0(k);
    for (std::size_t qi = 0; qi < units_here.size(); ++qi) {
      for (int i = 0; i < nx; ++i) {
        const double m = mu(i, qi);
        if (m == 0.0) continue;
        const int u = surface.policy[k](i, qi);
        const double q = dq * u;
        const double s = state.spot(k, g.x(i));
        cash += m * payoff_value(contract.payoff, q, s, contract.strike);
        delta += m * q * s / f0k;
        moved(i, units_here[qi] + u - base_next) += m;
      }
    }
    // diffuse each volume slice through the interval's sub-steps, forward in time
    Eigen::MatrixXd next(nx, units_next.size());
#pragma omp parallel for schedule(static) if (par)
    for (int qi = 0; qi < static_cast<int>(units_next.size()); ++qi) {
      std::vector<double> cur(nx), out(nx);
      Eigen::Map<Eigen::VectorXd>(cur.data(), nx) = moved.col(qi);
      for (int l = 0; l < setup.ops_per_date; ++l) {
        std::fill(out.begin(), out.end(), 0.0);
        setup.ops[k * setup.ops_per_date + l].scatter(cur, out);
        std::swap(cur, out);
      }
      next.col(qi) = Eigen::Map<const Eigen::VectorXd>(cur.data(), nx);
    }
    mu.swap(next);
  }

  // terminal penalty and consumption statistics
  for (int qi = 0; qi < surface.q_count(n); ++qi) {
    const double Q = surface.q_value(n, qi);
    double mass = 0.0;
    for (int i = 0; i < nx; ++i) {
      const double m = mu(i, qi);
      if (m == 0.0) continue;
      mass += m;
      cash += m * penalty_value(contract, state.spot(n, g.x(i)), Q);
    }
    if (mass != 0.0) res.consumption_distribution[Q] += mass;
  }

  res.delta = delta;
  res.std_error = 0.0;
  // internal consistency: the transported value must reproduce v_0(x0, 0)
  if (std::abs(cash - res.price) > 1e-7 * (1.0 + std::abs(res.price)))
    throw NumericalError("price: forward-transported value disagrees with the surface");
  return res;
}

double delta_envelope(const ValueSurface& surface, const StateModel1D& state,
                      const ContractSpec& contract, const VolumeGrid& volumes,
                      const GridEngineConfig& config) {
  return price(surface, state, contract, volumes, config).delta;
}

std::vector<std::vector<int>> reachable_unit_sets(const VolumeGrid& volumes, int n,
                                                  BangBang bang_bang) {
  std::vector<std::vector<int>> sets(n + 1);
  if (bang_bang == BangBang::Off) {
    for (int k = 0; k <= n; ++k)
      sets[k] = contiguous_units(volumes.lower_units(k), volumes.upper_units(k));
    return sets;
  }
  std::set<int> frontier{0};
  sets[0] = {0};
  for (int k = 0; k < n; ++k) {
    std::set<int> next;
    for (int u : frontier) {
      const auto range = volumes.admissible_units(k, u);
      if (range.empty())
        throw NumericalError("reachable_unit_sets: empty admissible set on the firm lattice");
      next.insert(u + range.lo);
      next.insert(u + range.hi);
    }
    frontier = std::move(next);
    sets[k + 1].assign(frontier.begin(), frontier.end());
  }
  return sets;
}

BangBangReport bang_bang_vs_enumeration(const StateModel1D& state, const ContractSpec& contract,
                                        const VolumeGrid& volumes,
                                        const GridEngineConfig& config) {
  GridEngineConfig full = config;
  full.bang_bang = BangBang::Off;
  GridEngineConfig ends = config;
  ends.bang_bang = BangBang::On;

  const ValueSurface a = solve_grid_1d(state, contract, volumes, full);
  const ValueSurface b = solve_grid_1d(state, contract, volumes, ends);
  const std::vector<std::vector<int>> reachable =
      reachable_unit_sets(volumes, contract.n_exercise, BangBang::On);

  BangBangReport rep;
  for (int k = 0; k <= a.n_dates; ++k) {
    const auto& reach = reachable[k];
    for (int qi = 0; qi < a.q_count(k); ++qi) {
      const int units = a.q_units[k][qi];
      const bool on_lattice = std::binary_search(reach.begin(), reach.end(), units);
      for (std::size_t i = 0; i < a.x_grid.size(); ++i) {
        const double d = std::abs(a.values[k](i, qi) - b.values[k](i, qi));
        if (d > rep.max_discrepancy_all) {
          rep.max_discrepancy_all = d;
          rep.worst_Q_all = a.q_value(k, qi);
        }
        if (on_lattice && d > rep.max_discrepancy) {
          rep.max_discrepancy = d;
          rep.worst_date = k;
          rep.worst_Q = a.q_value(k, qi);
          rep.worst_x = a.x_grid[i];
        }
      }
    }
  }
  return rep;
}

RefinementStudy m_refinement_study(const ModelSpec& model, const ContractSpec& contract,
                                   const VolumeGrid& volumes, GridEngineConfig config,
                                   std::span<const int> ms) {
  const StateModel1D state = factor_state_model(model, contract);
  RefinementStudy study;
  for (int m : ms) {
    GridEngineConfig c = config;
    c.m = m;
    c.transition = TransitionKind::Euler;
    const ValueSurface surf = solve_grid_1d(state, contract, volumes, c);
    study.rows.push_back({m, price(surf, state, contract, volumes, c).price});
  }
  if (state.exact_step) {
    GridEngineConfig c = config;
    c.m = 1;
    c.transition = TransitionKind::ExactStep;
    const ValueSurface surf = solve_grid_1d(state, contract, volumes, c);
    study.exact_price = price(surf, state, contract, volumes, c).price;
  }
  return study;
}

}  // namespace swing
