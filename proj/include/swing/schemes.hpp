#pragma once

#include "swing/market_models.hpp"
#include "swing/parallel.hpp"
#include "swing/rng.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace swing {

// Largest admissible truncation parameter lambda, 1/(2 + sqrt 2).
inline constexpr double kTruncationLambdaMax = 0.29289321881345248;

struct SchemeConfig {
  int m = 1;  // sub-steps per exercise interval; step h = T/(m n)
  int path_count = 0;
  std::uint64_t seed = 0;
  std::optional<double> truncation_lambda;

  double step(double maturity, int n) const { return maturity / (static_cast<double>(m) * n); }
  void validate() const;
};

// Scalar diffusion dX = kappa(t)(X - zeta) dt + sigma(t, X) dW together with
// the Lipschitz/semi-convexity data of sigma used by the truncated scheme.
struct Diffusion1D {
  std::function<double(double)> kappa;  // null means 0
  double zeta = 0.0;
  std::function<double(double, double)> sigma;
  double sigma_lip = 0.0;
  double a_sigma = 0.0;

  double drift(double t, double x) const { return kappa ? kappa(t) * (x - zeta) : 0.0; }
};

// Simulated states on the grid t_l = l T / (m n). Storage is either the full
// sub-step grid or the exercise dates only; exercise_slice maps date k to the
// stored index of t_{km}.
class PathEnsemble {
 public:
  PathEnsemble(int paths, int dim, std::vector<double> times, int slice_stride);

  int paths() const { return paths_; }
  int dim() const { return dim_; }
  int time_points() const { return static_cast<int>(times_.size()); }
  double time(int idx) const { return times_[idx]; }
  int exercise_slice(int k) const { return k * slice_stride_; }

  double state(int path, int idx, int d = 0) const {
    return data_[(static_cast<std::size_t>(path) * times_.size() + idx) * dim_ + d];
  }
  double& state(int path, int idx, int d = 0) {
    return data_[(static_cast<std::size_t>(path) * times_.size() + idx) * dim_ + d];
  }
  std::span<const double> raw() const { return data_; }

 private:
  int paths_, dim_, slice_stride_;
  std::vector<double> times_;
  std::vector<double> data_;
};

// One explicit Euler step x + h kappa(t_l)(x - zeta) + sqrt(h) sigma_{t_l}(x) z.
Eigen::VectorXd euler_step(const Eigen::VectorXd& x, int ell, const Eigen::VectorXd& z,
                           const std::function<double(double)>& kappa, const Eigen::VectorXd& zeta,
                           const VolField& vol, double h);

inline double euler_step_1d(double x, double z, double kappa_t, double zeta, double sigma_tx,
                            double h) {
  return x + h * kappa_t * (x - zeta) + std::sqrt(h) * sigma_tx * z;
}

// All-or-nothing truncation: z if |z| <= s_h (Euclidean norm), else 0.
Eigen::VectorXd truncate_noise(const Eigen::VectorXd& z, double s_h);
double truncate_noise(double z, double s_h);

// Threshold s_h = lambda / sqrt(h ([sigma]_Lip^2 + a_sigma)).
double truncation_threshold(double h, double sigma_lip, double a_sigma, double lambda);

// Euler paths of a scalar diffusion, one i.i.d. N(0,1) draw per sub-step,
// addressed (path, sub-step) so the ensemble is bit-identical for a fixed
// seed under any worker count.
PathEnsemble simulate_paths(const Diffusion1D& dyn, double x0, double maturity, int n,
                            const SchemeConfig& config, bool truncated,
                            ExecPolicy exec = ExecPolicy::OpenMP);

// Correlated OU factor ensemble of the forward model. Euler sub-steps by
// default; exact_steps draws the factors from their exact Gaussian
// transition instead.
PathEnsemble simulate_factor_paths(const ModelSpec& model, double maturity, int n,
                                   const SchemeConfig& config, bool exercise_only = true,
                                   bool exact_steps = false,
                                   ExecPolicy exec = ExecPolicy::OpenMP);

// Exact-in-law OU update e^{-alpha dt} x + sqrt((1 - e^{-2 alpha dt})/(2 alpha)) z.
double exact_ou_step(double x, double alpha, double dt, double z);

// Gauss-Hermite approximation of P(f)(x) = E f(x + h kappa(t)(x - zeta) + sqrt(h) sigma(t,x) Z)
// for f sampled on a grid; evaluations beyond the grid use linear
// continuation and are counted in extrapolation_hits.
struct TransitionResult {
  std::vector<double> values;
  long extrapolation_hits = 0;
};
TransitionResult quadrature_transition(std::span<const double> f, std::span<const double> x_grid,
                                       double t, const Diffusion1D& dyn, double h, int node_count);

// Residual of the truncated Stein identity for the driftless step
// E(x, z) = x + sqrt(h) sigma_x z with z the truncated Gaussian:
//   E[f'(E) Ztrunc] = E[f''(E) sqrt(h) sigma_x 1{Z != 0}(1 - e^{-(s^2 - Z^2)/2})],
// both sides integrated by Gauss-Legendre over [-s_h, s_h].
double truncated_stein_residual(const std::function<double(double)>& f_prime,
                                const std::function<double(double)>& f_second, double x, double h,
                                double sigma_x, double s_h, int gl_nodes = 400);

// Coupled truncated-vs-plain Euler study: same Gaussians, one stream
// truncated at s_h. Reports sup_{x in K} ||Xtilde - Xbar||_u per refinement m
// and the per-start ratio gap/(1+|x|).
struct GapStudyResult {
  std::vector<int> ms;
  std::vector<double> sup_gap;               // per m
  std::vector<double> threshold;             // s_h per m
  std::vector<double> starts;                // x grid over K
  std::vector<std::vector<double>> gap_by_start;  // [m][start]
  double max_ratio = 0.0;                    // max over (m, x) of gap/(1+|x|)
};
GapStudyResult truncated_plain_gap(const Diffusion1D& dyn, double maturity, int n,
                                   std::span<const int> ms, double k_lo, double k_hi,
                                   int start_count, double u_order, const SchemeConfig& base,
                                   ExecPolicy exec = ExecPolicy::OpenMP);

}  // namespace swing
