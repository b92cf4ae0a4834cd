#include "swing/bdpp.hpp"

#include "swing/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace swing {

namespace {

// Exponent tuples of the monomials in q variables up to the given total
// degree, graded order.
std::vector<std::vector<int>> monomial_exponents(int q, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> tmp(q, 0);
  auto rec = [&](auto&& self, int pos, int rem) -> void {
    if (pos == q) {
      if (rem == 0) out.push_back(tmp);
      return;
    }
    for (int e = 0; e <= rem; ++e) {
      tmp[pos] = e;
      self(self, pos + 1, rem - e);
    }
    tmp[pos] = 0;
  };
  for (int total = 0; total <= degree; ++total) rec(rec, 0, total);
  return out;
}

struct EnsembleData {
  PathEnsemble paths;
  Eigen::MatrixXd spots;      // (paths, n+1)
  Eigen::MatrixXd index_avg;  // (paths, n) when the payoff is indexed
};

EnsembleData make_ensemble(const ModelSpec& model, const ContractSpec& contract,
                           const SchemeConfig& scheme, const LsmcConfig& config,
                           std::uint64_t seed) {
  SchemeConfig cfg = scheme;
  cfg.seed = seed;
  EnsembleData data{simulate_factor_paths(model, contract.maturity, contract.n_exercise, cfg,
                                          /*exercise_only=*/true, config.exact_factor_steps,
                                          config.exec),
                    {},
                    {}};
  const int n = contract.n_exercise;
  const int paths = data.paths.paths();
  const int q = model.factor_count;
  const bool indexed = contract.payoff == PayoffKind::IndexedStrike;

  data.spots.resize(paths, n + 1);
  if (indexed) data.index_avg.resize(paths, n);

  std::vector<double> f0(n + 1), half_lam2(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = contract.exercise_time(k);
    f0[k] = model.initial_forward(t);
    half_lam2[k] = 0.5 * lambda_sq(t, model);
  }

  const bool par = config.exec == ExecPolicy::OpenMP;
#pragma omp parallel for schedule(static) if (par)
  for (int p = 0; p < paths; ++p) {
    for (int k = 0; k <= n; ++k) {
      double dot = 0.0;
      for (int d = 0; d < q; ++d) dot += model.vols[d] * data.paths.state(p, k, d);
      const double s = f0[k] * std::exp(dot - half_lam2[k]);
      data.spots(p, k) = s;
      if (indexed && k < n) {
        // window average of past spots; at k = 0 the empty window reads as
        // the current spot so the date-0 payoff vanishes
        if (k == 0) {
          data.index_avg(p, 0) = s;
        } else {
          const int first = contract.index_window > 0 ? std::max(0, k - contract.index_window) : 0;
          double acc = 0.0;
          for (int i = first; i < k; ++i) acc += data.spots(p, i);
          data.index_avg(p, k) = acc / (k - first);
        }
      }
    }
  }
  return data;
}

double unit_payoff(const ContractSpec& contract, const EnsembleData& data, int p, int k) {
  const double s = data.spots(p, k);
  switch (contract.payoff) {
    case PayoffKind::FixedStrike:
      return s - contract.strike;
    case PayoffKind::Call:
      return std::max(s - contract.strike, 0.0);
    case PayoffKind::IndexedStrike:
      return s - data.index_avg(p, k);
  }
  return 0.0;
}

Eigen::MatrixXd build_basis(const EnsembleData& data, const ModelSpec& model,
                            const ContractSpec& contract, int k, int degree, ExecPolicy exec) {
  const int paths = data.paths.paths();
  const int q = model.factor_count;
  const auto exps = monomial_exponents(q, degree);
  const bool indexed = contract.payoff == PayoffKind::IndexedStrike;
  const int nb = static_cast<int>(exps.size()) + (indexed ? 1 : 0);

  Eigen::MatrixXd B(paths, nb);
  const bool par = exec == ExecPolicy::OpenMP;
#pragma omp parallel for schedule(static) if (par)
  for (int p = 0; p < paths; ++p) {
    for (std::size_t c = 0; c < exps.size(); ++c) {
      double v = 1.0;
      for (int d = 0; d < q; ++d)
        for (int e = 0; e < exps[c][d]; ++e) v *= data.paths.state(p, k, d);
      B(p, c) = v;
    }
    if (indexed) B(p, nb - 1) = data.index_avg(p, k);
  }
  return B;
}

// column lookup: lattice unit -> column index in a reachable set
std::vector<int> unit_to_col(const std::vector<int>& units) {
  std::vector<int> map(units.back() - units.front() + 1, -1);
  for (std::size_t c = 0; c < units.size(); ++c) map[units[c] - units.front()] = static_cast<int>(c);
  return map;
}

}  // namespace

LsmcSurface solve_lsmc(const ModelSpec& model, const ContractSpec& contract,
                       const VolumeGrid& volumes, const SchemeConfig& scheme,
                       const LsmcConfig& config) {
  model.validate();
  contract.validate();
  scheme.validate();
  if (scheme.path_count < 16) throw std::invalid_argument("solve_lsmc: too few paths");

  const int n = contract.n_exercise;
  const EnsembleData data = make_ensemble(model, contract, scheme, config, scheme.seed);
  const int paths = scheme.path_count;
  const double dq = volumes.delta_q();
  const bool par = config.exec == ExecPolicy::OpenMP;

  LsmcSurface surf;
  surf.n_dates = n;
  surf.delta_q = dq;
  surf.basis_degree = config.basis_degree;
  surf.q_units = reachable_unit_sets(volumes, n, config.bang_bang);
  surf.coeffs.resize(n);
  surf.degree_used.assign(n, config.basis_degree);

  // terminal value-to-go
  Eigen::MatrixXd v_next(paths, surf.q_units[n].size());
  for (std::size_t qi = 0; qi < surf.q_units[n].size(); ++qi) {
    const double Q = dq * surf.q_units[n][qi];
    for (int p = 0; p < paths; ++p)
      v_next(p, qi) = penalty_value(contract, data.spots(p, n), Q);
  }

  for (int k = n - 1; k >= 0; --k) {
    const auto& units_here = surf.q_units[k];
    const auto& units_next = surf.q_units[k + 1];
    const std::vector<int> col_of = unit_to_col(units_next);
    const int base_next = units_next.front();

    // regression with rank-driven degree reduction
    int degree = config.basis_degree;
    Eigen::MatrixXd B;
    Eigen::LDLT<Eigen::MatrixXd> solver;
    for (;;) {
      B = build_basis(data, model, contract, k, degree, config.exec);
      const Eigen::MatrixXd gram = B.transpose() * B;
      Eigen::LDLT<Eigen::MatrixXd> probe(gram);
      const double dmax = probe.vectorD().cwiseAbs().maxCoeff();
      const double dmin = probe.vectorD().minCoeff();
      if (degree == 0 || (dmin > 1e-12 * dmax)) {
        const double ridge = config.ridge * gram.trace() / gram.rows();
        solver.compute(gram + ridge * Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
        break;
      }
      --degree;
      char note[96];
      std::snprintf(note, sizeof(note), "date %d: rank-deficient basis, degree reduced to %d\n", k,
                    degree);
      surf.diagnostics += note;
    }
    surf.degree_used[k] = degree;
    surf.coeffs[k] = solver.solve(B.transpose() * v_next);

    // fitted continuations and the one-step policy improvement
    const Eigen::MatrixXd fitted = B * surf.coeffs[k];
    Eigen::MatrixXd v_here(paths, units_here.size());
    std::atomic<bool> bad{false};
#pragma omp parallel for schedule(static) if (par)
    for (int p = 0; p < paths; ++p) {
      const double pay = unit_payoff(contract, data, p, k);
      for (std::size_t qi = 0; qi < units_here.size(); ++qi) {
        const int Qu = units_here[qi];
        const auto range = volumes.admissible_units(k, Qu);
        int best_u = -1;
        double best = -std::numeric_limits<double>::infinity();
        auto consider = [&](int u) {
          const int col = col_of[Qu + u - base_next];
          if (col < 0) return;  // not on the surface's volume lattice
          const double cand = dq * u * pay + fitted(p, col);
          if (cand > best) {
            best = cand;
            best_u = u;
          }
        };
        if (config.bang_bang == BangBang::On) {
          consider(range.lo);
          if (range.hi != range.lo) consider(range.hi);
        } else {
          for (int u = range.lo; u <= range.hi; ++u) consider(u);
        }
        if (best_u < 0) {
          bad.store(true);
          v_here(p, qi) = 0.0;
          continue;
        }
        v_here(p, qi) = dq * best_u * pay + v_next(p, col_of[Qu + best_u - base_next]);
      }
    }
    if (bad.load())
      throw NumericalError("solve_lsmc: admissible control left the volume lattice");
    v_next.swap(v_here);
  }
  return surf;
}

PricingResult price(const LsmcSurface& surface, const ModelSpec& model,
                    const ContractSpec& contract, const VolumeGrid& volumes,
                    const SchemeConfig& scheme, const LsmcConfig& config) {
  const int n = surface.n_dates;
  const double dq = surface.delta_q;
  const EnsembleData data = make_ensemble(model, contract, scheme, config, scheme.seed + 1);
  const int paths = scheme.path_count;
  const bool par = config.exec == ExecPolicy::OpenMP;

  std::vector<double> f0(n);
  for (int k = 0; k < n; ++k) f0[k] = model.initial_forward(contract.exercise_time(k));

  std::vector<double> cash(paths, 0.0), delta(paths, 0.0);
  std::vector<int> q_units(paths, 0);

  for (int k = 0; k < n; ++k) {
    const auto& units_next = surface.q_units[k + 1];
    const std::vector<int> col_of = unit_to_col(units_next);
    const int base_next = units_next.front();
    const Eigen::MatrixXd B = build_basis(data, model, contract, k, surface.degree_used[k],
                                          config.exec);
    const Eigen::MatrixXd fitted = B * surface.coeffs[k];
    std::atomic<bool> bad{false};
#pragma omp parallel for schedule(static) if (par)
    for (int p = 0; p < paths; ++p) {
      const double pay = unit_payoff(contract, data, p, k);
      const int Qu = q_units[p];
      const auto range = volumes.admissible_units(k, Qu);
      int best_u = -1;
      double best = -std::numeric_limits<double>::infinity();
      auto consider = [&](int u) {
        const int col = Qu + u >= base_next &&
                                Qu + u <= units_next.back()
                            ? col_of[Qu + u - base_next]
                            : -1;
        if (col < 0) return;  // not on the surface's volume lattice
        const double cand = dq * u * pay + fitted(p, col);
        if (cand > best) {
          best = cand;
          best_u = u;
        }
      };
      if (config.bang_bang == BangBang::On) {
        consider(range.lo);
        if (range.hi != range.lo) consider(range.hi);
      } else {
        for (int u = range.lo; u <= range.hi; ++u) consider(u);
      }
      if (best_u < 0) {
        bad.store(true);
        continue;
      }
      const double q = dq * best_u;
      cash[p] += payoff_value(contract.payoff, q, data.spots(p, k),
                              contract.payoff == PayoffKind::IndexedStrike
                                  ? data.index_avg(p, k)
                                  : contract.strike);
      delta[p] += q * data.spots(p, k) / f0[k];
      q_units[p] = Qu + best_u;
    }
    if (bad.load())
      throw NumericalError(
          "price: the surface's volume lattice does not cover the forward policy");
  }

#pragma omp parallel for schedule(static) if (par)
  for (int p = 0; p < paths; ++p)
    cash[p] += penalty_value(contract, data.spots(p, n), dq * q_units[p]);

  PricingResult res;
  const MeanStdErr pv = mean_std_err(cash);
  const MeanStdErr dv = mean_std_err(delta);
  res.price = pv.mean;
  res.std_error = pv.std_err;
  res.delta = dv.mean;
  res.delta_std_error = dv.std_err;
  for (int p = 0; p < paths; ++p) res.consumption_distribution[dq * q_units[p]] += 1.0 / paths;
  return res;
}

}  // namespace swing
