#include "swing/schemes.hpp"

#include "swing/errors.hpp"
#include "swing/quadrature.hpp"
#include "grid_ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace swing {

void SchemeConfig::validate() const {
  if (m < 1) throw std::invalid_argument("SchemeConfig: m must be >= 1");
  if (path_count < 0) throw std::invalid_argument("SchemeConfig: path_count must be >= 0");
  if (truncation_lambda) {
    const double l = *truncation_lambda;
    if (!(l > 0.0 && l < kTruncationLambdaMax))
      throw std::invalid_argument("SchemeConfig: truncation_lambda outside (0, 1/(2+sqrt 2))");
  }
}

PathEnsemble::PathEnsemble(int paths, int dim, std::vector<double> times, int slice_stride)
    : paths_(paths), dim_(dim), slice_stride_(slice_stride), times_(std::move(times)) {
  data_.assign(static_cast<std::size_t>(paths_) * times_.size() * dim_, 0.0);
}

Eigen::VectorXd euler_step(const Eigen::VectorXd& x, int ell, const Eigen::VectorXd& z,
                           const std::function<double(double)>& kappa, const Eigen::VectorXd& zeta,
                           const VolField& vol, double h) {
  if (x.size() != vol.rows() || z.size() != vol.cols())
    throw std::invalid_argument("euler_step: dimension mismatch");
  const double t = vol.step_time(ell);
  Eigen::VectorXd out = x;
  if (kappa) out += h * kappa(t) * (x - zeta);
  out += std::sqrt(h) * (vol.instantaneous(t, x) * z);
  return out;
}

Eigen::VectorXd truncate_noise(const Eigen::VectorXd& z, double s_h) {
  if (!(s_h > 0.0)) throw std::invalid_argument("truncate_noise: s_h must be > 0");
  if (z.norm() <= s_h) return z;
  return Eigen::VectorXd::Zero(z.size());
}

double truncate_noise(double z, double s_h) {
  if (!(s_h > 0.0)) throw std::invalid_argument("truncate_noise: s_h must be > 0");
  return std::abs(z) <= s_h ? z : 0.0;
}

double truncation_threshold(double h, double sigma_lip, double a_sigma, double lambda) {
  if (!(h > 0.0)) throw std::invalid_argument("truncation_threshold: h must be > 0");
  if (!(lambda > 0.0 && lambda < kTruncationLambdaMax))
    throw std::invalid_argument("truncation_threshold: lambda outside (0, 1/(2+sqrt 2))");
  const double denom = sigma_lip * sigma_lip + a_sigma;
  if (!(denom > 0.0))
    throw std::domain_error("truncation_threshold: constant volatility needs no truncation");
  return lambda / std::sqrt(h * denom);
}

double exact_ou_step(double x, double alpha, double dt, double z) {
  if (!(alpha > 0.0 && dt > 0.0)) throw std::invalid_argument("exact_ou_step: need alpha, dt > 0");
  const double decay = std::exp(-alpha * dt);
  return decay * x + std::sqrt((1.0 - decay * decay) / (2.0 * alpha)) * z;
}

namespace {

// Packs (path, step) so the first non-finite state can be reported from a
// parallel loop via a single atomic min.
void record_bad(std::atomic<long long>& slot, int path, int step, int mn) {
  const long long packed = static_cast<long long>(path) * (mn + 1) + step;
  long long cur = slot.load();
  while ((cur < 0 || packed < cur) && !slot.compare_exchange_weak(cur, packed)) {
  }
}

[[noreturn]] void throw_bad(long long packed, int mn) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "simulation produced a non-finite state at path %lld, step %lld",
                packed / (mn + 1), packed % (mn + 1));
  throw NumericalError(buf);
}

}  // namespace

PathEnsemble simulate_paths(const Diffusion1D& dyn, double x0, double maturity, int n,
                            const SchemeConfig& config, bool truncated, ExecPolicy exec) {
  config.validate();
  if (!dyn.sigma) throw std::invalid_argument("simulate_paths: missing volatility");
  if (truncated && !config.truncation_lambda)
    throw std::invalid_argument("simulate_paths: truncated run needs truncation_lambda");

  const int mn = config.m * n;
  const double h = config.step(maturity, n);
  const double sqrt_h = std::sqrt(h);
  const double s_h =
      truncated ? truncation_threshold(h, dyn.sigma_lip, dyn.a_sigma, *config.truncation_lambda)
                : 0.0;

  std::vector<double> times(mn + 1);
  for (int l = 0; l <= mn; ++l) times[l] = maturity * l / mn;

  PathEnsemble ens(config.path_count, 1, times, config.m);
  const CounterRng rng(config.seed);
  std::atomic<long long> bad{-1};

  const bool par = exec == ExecPolicy::OpenMP;
#pragma omp parallel for schedule(static) if (par)
  for (int p = 0; p < config.path_count; ++p) {
    double x = x0;
    ens.state(p, 0) = x;
    for (int l = 0; l < mn; ++l) {
      double z = rng.normal(p, l, 0);
      if (truncated) z = truncate_noise(z, s_h);
      const double kap = dyn.kappa ? dyn.kappa(times[l]) : 0.0;
      x = x + h * kap * (x - dyn.zeta) + sqrt_h * dyn.sigma(times[l], x) * z;
      if (!std::isfinite(x)) {
        record_bad(bad, p, l + 1, mn);
        break;
      }
      ens.state(p, l + 1) = x;
    }
  }
  if (bad.load() >= 0) throw_bad(bad.load(), mn);
  return ens;
}

PathEnsemble simulate_factor_paths(const ModelSpec& model, double maturity, int n,
                                   const SchemeConfig& config, bool exercise_only,
                                   bool exact_steps, ExecPolicy exec) {
  model.validate();
  config.validate();
  const int q = model.factor_count;
  const int mn = config.m * n;
  const double h = config.step(maturity, n);
  const double sqrt_h = std::sqrt(h);

  Eigen::MatrixXd corr_factor =
      q >= 2 ? cholesky_explicit(model.rho, q) : Eigen::MatrixXd::Identity(1, 1);

  // Exact transition: X' = decay .* X + M eta with M M^T the step covariance.
  Eigen::VectorXd decay(q);
  Eigen::MatrixXd exact_factor;
  if (exact_steps) {
    Eigen::MatrixXd cov(q, q);
    for (int i = 0; i < q; ++i) {
      decay(i) = std::exp(-model.mean_reversions[i] * h);
      for (int j = 0; j < q; ++j) {
        const double asum = model.mean_reversions[i] + model.mean_reversions[j];
        const double rho_ij = i == j ? 1.0 : model.rho;
        cov(i, j) = rho_ij * (1.0 - std::exp(-asum * h)) / asum;
      }
    }
    exact_factor = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
  }

  std::vector<double> times;
  int stride;
  if (exercise_only) {
    times.resize(n + 1);
    for (int k = 0; k <= n; ++k) times[k] = maturity * k / n;
    stride = 1;
  } else {
    times.resize(mn + 1);
    for (int l = 0; l <= mn; ++l) times[l] = maturity * l / mn;
    stride = config.m;
  }

  PathEnsemble ens(config.path_count, q, times, stride);
  const CounterRng rng(config.seed);
  std::atomic<long long> bad{-1};

  const bool par = exec == ExecPolicy::OpenMP;
#pragma omp parallel for schedule(static) if (par)
  for (int p = 0; p < config.path_count; ++p) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd z(q), dw(q);
    for (int d = 0; d < q; ++d) ens.state(p, 0, d) = 0.0;
    for (int l = 0; l < mn; ++l) {
      for (int d = 0; d < q; ++d) z(d) = rng.normal(p, l, d);
      if (exact_steps) {
        dw.noalias() = exact_factor * z;
        for (int d = 0; d < q; ++d) x(d) = decay(d) * x(d) + dw(d);
      } else {
        dw.noalias() = corr_factor * z;
        for (int d = 0; d < q; ++d)
          x(d) = x(d) * (1.0 - model.mean_reversions[d] * h) + sqrt_h * dw(d);
      }
      if (!x.allFinite()) {
        record_bad(bad, p, l + 1, mn);
        break;
      }
      const int l1 = l + 1;
      if (!exercise_only) {
        for (int d = 0; d < q; ++d) ens.state(p, l1, d) = x(d);
      } else if (l1 % config.m == 0) {
        for (int d = 0; d < q; ++d) ens.state(p, l1 / config.m, d) = x(d);
      }
    }
  }
  if (bad.load() >= 0) throw_bad(bad.load(), mn);
  return ens;
}

TransitionResult quadrature_transition(std::span<const double> f, std::span<const double> x_grid,
                                       double t, const Diffusion1D& dyn, double h,
                                       int node_count) {
  if (f.size() != x_grid.size())
    throw std::invalid_argument("quadrature_transition: f and grid sizes differ");
  if (node_count < 8) throw std::invalid_argument("quadrature_transition: need node_count >= 8");
  for (double v : f)
    if (!std::isfinite(v)) throw std::invalid_argument("quadrature_transition: f must be finite");

  const detail::UniformGrid grid = detail::UniformGrid::from_points(x_grid);
  const double sqrt_h = std::sqrt(h);
  std::vector<double> a(grid.n), b(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    const double kap = dyn.kappa ? dyn.kappa(t) : 0.0;
    a[i] = x + h * kap * (x - dyn.zeta);
    b[i] = sqrt_h * dyn.sigma(t, x);
  }
  const detail::SubstepOperator op(grid, std::move(a), std::move(b), node_count);

  TransitionResult res;
  res.values.resize(grid.n);
  op.apply(f, res.values, &res.extrapolation_hits);
  return res;
}

double truncated_stein_residual(const std::function<double(double)>& f_prime,
                                const std::function<double(double)>& f_second, double x, double h,
                                double sigma_x, double s_h, int gl_nodes) {
  if (!(s_h > 0.0)) throw std::invalid_argument("truncated_stein_residual: s_h must be > 0");
  const QuadratureRule& gl = gauss_legendre(gl_nodes);
  const double sqrt_h = std::sqrt(h);
  const double inv_sqrt_2pi = 0.3989422804014326779;
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
    const double z = s_h * gl.nodes[j];
    const double w = s_h * gl.weights[j] * inv_sqrt_2pi * std::exp(-0.5 * z * z);
    const double y = x + sqrt_h * sigma_x * z;
    lhs += w * f_prime(y) * z;
    rhs += w * f_second(y) * sqrt_h * sigma_x * (1.0 - std::exp(-0.5 * (s_h * s_h - z * z)));
  }
  return std::abs(lhs - rhs);
}

GapStudyResult truncated_plain_gap(const Diffusion1D& dyn, double maturity, int n,
                                   std::span<const int> ms, double k_lo, double k_hi,
                                   int start_count, double u_order, const SchemeConfig& base,
                                   ExecPolicy exec) {
  base.validate();
  if (!base.truncation_lambda)
    throw std::invalid_argument("truncated_plain_gap: truncation_lambda required");
  if (u_order < 1.0) throw std::invalid_argument("truncated_plain_gap: need u >= 1");
  if (start_count < 1) throw std::invalid_argument("truncated_plain_gap: need starts");

  GapStudyResult res;
  res.ms.assign(ms.begin(), ms.end());
  res.starts.resize(start_count);
  for (int s = 0; s < start_count; ++s)
    res.starts[s] = start_count == 1 ? k_lo : k_lo + (k_hi - k_lo) * s / (start_count - 1);

  const int paths = base.path_count;
  const bool par = exec == ExecPolicy::OpenMP;
  constexpr int kChunk = 4096;
  const int chunks = (paths + kChunk - 1) / kChunk;

  for (int m : ms) {
    SchemeConfig cfg = base;
    cfg.m = m;
    const int mn = m * n;
    const double h = cfg.step(maturity, n);
    const double sqrt_h = std::sqrt(h);
    const double s_h = truncation_threshold(h, dyn.sigma_lip, dyn.a_sigma, *cfg.truncation_lambda);
    res.threshold.push_back(s_h);
    const CounterRng rng(cfg.seed);

    std::vector<double> gap_per_start(start_count, 0.0);
    for (int s = 0; s < start_count; ++s) {
      const double x0 = res.starts[s];
      // moment accumulators E|diff|^u per step, filled chunk by chunk so the
      // reduction order never depends on the worker count
      std::vector<std::vector<double>> chunk_acc(chunks, std::vector<double>(mn, 0.0));
#pragma omp parallel for schedule(static) if (par)
      for (int c = 0; c < chunks; ++c) {
        const int p_lo = c * kChunk;
        const int p_hi = std::min(paths, p_lo + kChunk);
        auto& acc = chunk_acc[c];
        for (int p = p_lo; p < p_hi; ++p) {
          double xp = x0, xt = x0;
          for (int l = 0; l < mn; ++l) {
            const double t = maturity * l / mn;
            const double z = rng.normal(p, l, 0);
            const double zt = truncate_noise(z, s_h);
            const double kap = dyn.kappa ? dyn.kappa(t) : 0.0;
            xp = xp + h * kap * (xp - dyn.zeta) + sqrt_h * dyn.sigma(t, xp) * z;
            xt = xt + h * kap * (xt - dyn.zeta) + sqrt_h * dyn.sigma(t, xt) * zt;
            acc[l] += std::pow(std::abs(xt - xp), u_order);
          }
        }
      }
      double worst = 0.0;
      for (int l = 0; l < mn; ++l) {
        double tot = 0.0;
        for (int c = 0; c < chunks; ++c) tot += chunk_acc[c][l];
        worst = std::max(worst, std::pow(tot / paths, 1.0 / u_order));
      }
      gap_per_start[s] = worst;
      res.max_ratio = std::max(res.max_ratio, worst / (1.0 + std::abs(x0)));
    }
    res.gap_by_start.push_back(gap_per_start);
    res.sup_gap.push_back(*std::max_element(gap_per_start.begin(), gap_per_start.end()));
  }
  return res;
}

}  // namespace swing
