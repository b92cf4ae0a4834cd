#include "swing/reference.hpp"

#include "swing/errors.hpp"
#include "grid_ops.hpp"

#include <cmath>

namespace swing::reference {

PathEnsemble simulate_paths(const Diffusion1D& dyn, double x0, double maturity, int n,
                            const SchemeConfig& config, bool truncated) {
  config.validate();
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
  for (int p = 0; p < config.path_count; ++p) {
    double x = x0;
    ens.state(p, 0) = x;
    for (int l = 0; l < mn; ++l) {
      double z = rng.normal(p, l, 0);
      if (truncated) z = truncate_noise(z, s_h);
      const double kap = dyn.kappa ? dyn.kappa(times[l]) : 0.0;
      x = x + h * kap * (x - dyn.zeta) + sqrt_h * dyn.sigma(times[l], x) * z;
      if (!std::isfinite(x)) throw NumericalError("reference simulation hit a non-finite state");
      ens.state(p, l + 1) = x;
    }
  }
  return ens;
}

std::vector<double> transition_sweep(std::span<const double> f, std::span<const double> x_grid,
                                     double t, const Diffusion1D& dyn, double h, int node_count) {
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
  std::vector<double> out(grid.n);
  long extrap = 0;
  op.apply(f, out, &extrap);
  return out;
}

}  // namespace swing::reference
