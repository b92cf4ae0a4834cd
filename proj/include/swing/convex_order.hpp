#pragma once

#include "swing/market_models.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace swing {

enum class OrderStatus { Holds, Fails, Indeterminate };

// Outcome of an order / convexity test: worst violation over the test family
// and where it happened.
struct OrderVerdict {
  OrderStatus status = OrderStatus::Indeterminate;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  std::string witness;

  bool holds() const { return status == OrderStatus::Holds; }
};

// A <= B in the matrix pre-order iff B B^T - A A^T is positive semidefinite;
// tested through the smallest eigenvalue of the symmetrized difference with
// tolerance tol * (1 + ||B B^T||).
OrderVerdict psd_order(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol = 1e-12);

// Empirical check that A Z <=_cvx B Z for Z ~ N(0, I_q): common draws, test
// family of norms and directional calls (<u, .> - k)_+, 3 standard-error
// margins.
OrderVerdict gaussian_convex_order_check(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                         int sample_count, int direction_count,
                                         int threshold_count, std::uint64_t seed);

enum class ConvexOrderMode { Cvx, Icx, Dcx };

// Potential-function test of U <= V in convex order on samples: mean equality
// (Cvx only) plus E(U - k)_+ <= E(V - k)_+ over the threshold grid (Dcx uses
// E(k - .)_+), all with 3 standard-error margins.
OrderVerdict convex_order_1d(std::span<const double> u, std::span<const double> v,
                             std::span<const double> thresholds, ConvexOrderMode mode);

// Certifies the matrix-convexity of a field through its structure: convexity
// of every |lambda_i| for RowDiagOrthogonal fields, convexity of |sigma| in
// the scalar case, Indeterminate for opaque fields.
OrderVerdict check_matrix_field_convexity(const VolField& field, std::span<const double> xs,
                                          std::span<const double> lambdas, double tol = 1e-10);

struct SemiConvexityReport {
  double a_sigma = 0.0;
  int grid_points = 0;
  double min_second_diff = 0.0;  // of sigma^2, divided by step^2
  double argmin_x = 0.0;
};

// a_sigma = inf{a >= 0 : sigma^2(x) + a x^2 convex}, estimated from centered
// second differences of sigma^2 on [lo, hi].
SemiConvexityReport estimate_semiconvexity(const std::function<double(double)>& sigma, double lo,
                                           double hi, int points);

struct LipschitzChainBound {
  double bound = 0.0;
  double growth_constant = 0.0;             // C_{h,kappa,sigma}
  std::vector<double> step_powers;          // C^{mi} for i = k..n
  std::vector<double> exp_envelope;         // e^{t_i C_{kappa,sigma}}
};

// Sum_{i=k}^{n-1} C^{mi} [Psi_i]_Lip + C^{mn} [P_c]_Lip with
// C = 1 + h([kappa]_inf + [sigma]_Lip^2 / 2), plus the exponential envelope
// e^{t_i C_{kappa,sigma}} dominating each power (t_i = i m h).
LipschitzChainBound lipschitz_chain_bound(int k, int m, double h, double kappa_sup,
                                          double sigma_lip, std::span<const double> payoff_lips,
                                          double penalty_lip);

// c_beta = inf{c >= 0 : beta(x) + c x non-decreasing}, from forward
// difference quotients on [lo, hi].
double drift_monotonicity_coefficient(const std::function<double(double)>& beta, double lo,
                                      double hi, int points);

}  // namespace swing
