#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace swing {

// q-factor log-normal forward curve model. Factor i is the Ornstein-Uhlenbeck
// integral X_t^i with mean reversion alpha_i; the driving Brownian motions
// carry a single equicorrelation parameter rho. The spot is
//   S_t = F_{0,t} * exp(<sigma, X_t> - lambda_t^2 / 2).
struct ModelSpec {
  int factor_count = 1;
  std::vector<double> mean_reversions;  // alpha_i, 1/years, > 0
  std::vector<double> vols;             // sigma_i, 1/sqrt(years), >= 0
  double rho = 0.0;                     // in (-1/(q-1), 1) when q >= 2
  double f0 = 1.0;                      // flat initial curve F_{0,t} = f0
  std::vector<double> f0_times;         // optional piecewise-linear curve
  std::vector<double> f0_values;

  double initial_forward(double t) const;
  void validate() const;  // throws std::invalid_argument
};

struct FactorState {
  double time = 0.0;
  Eigen::VectorXd factors;
};

// Equicorrelation matrix Gamma(rho)_{ij} = rho + (1 - rho) 1{i=j}.
Eigen::MatrixXd gamma_matrix(double rho, int q);

// Closed-form lower-triangular Cholesky factor of Gamma(rho):
// column j carries d_j on the diagonal and a constant l_j below it, with
// d_1 = 1, l_1 = rho, d_j = sqrt(d_{j-1}^2 - l_{j-1}^2),
// l_j = (rho - 1)/d_j + d_j.
Eigen::MatrixXd cholesky_explicit(double rho, int q);

// Log-variance compensator lambda_t^2, including the equicorrelated cross
// terms.
double lambda_sq(double t, const ModelSpec& model);

double spot_price(const FactorState& state, const ModelSpec& model);

enum class VolStructure { RowDiagOrthogonal, Scalar, Opaque };

// Time-indexed d x q matrix volatility field sigma_t(x). When constructed
// over a step grid, step_matrix(l, x) = sqrt(t_{l+1} - t_l) * sigma_{t_l}(x)
// is the per-interval matrix of the ARCH-style recursion
// X_{l+1} = X_l + step_matrix(l, X_l) Z_{l+1}.
class VolField {
 public:
  using Eval = std::function<Eigen::MatrixXd(double t, const Eigen::VectorXd& x)>;
  using DiagScaling = std::function<double(double x)>;

  VolField(int d, int q, Eval inst, VolStructure form);

  void set_step_grid(std::vector<double> times);
  void set_diag_scalings(std::vector<DiagScaling> scalings);

  int rows() const { return d_; }
  int cols() const { return q_; }
  VolStructure structural_form() const { return form_; }
  bool has_step_grid() const { return times_.size() >= 2; }
  int steps() const { return static_cast<int>(times_.size()) - 1; }
  double step_time(int ell) const { return times_.at(ell); }
  double step_dt(int ell) const { return times_.at(ell + 1) - times_.at(ell); }

  Eigen::MatrixXd instantaneous(double t, const Eigen::VectorXd& x) const;
  Eigen::MatrixXd step_matrix(int ell, const Eigen::VectorXd& x) const;

  // Scalar conveniences for d = 1 fields evaluated at a scalar state.
  Eigen::MatrixXd instantaneous(double t, double x) const;
  Eigen::MatrixXd step_matrix(int ell, double x) const;

  // Diagonal scalings lambda_i(x) of the A diag(lambda_1(x),...,lambda_q(x)) O
  // factorization; empty unless structural_form is RowDiagOrthogonal.
  const std::vector<DiagScaling>& diag_scalings() const { return scalings_; }

 private:
  int d_, q_;
  Eval inst_;
  VolStructure form_;
  std::vector<double> times_;
  std::vector<DiagScaling> scalings_;
};

// Row field of the multi-factor forward dynamics on a step grid:
// step_matrix(k, x) = (x sqrt(dt_k) sigma_1 e^{-alpha_1 (T - t_k)}, ...) L(rho).
VolField vol_field_multifactor(const ModelSpec& model, double maturity,
                               const std::vector<double>& step_times);

}  // namespace swing
