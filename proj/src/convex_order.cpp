#include "swing/convex_order.hpp"

#include "swing/parallel.hpp"
#include "swing/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace swing {

namespace {

std::string format_witness(const char* fmt, double a, double b = 0.0) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), fmt, a, b);
  return buf;
}

}  // namespace

OrderVerdict psd_order(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("psd_order: dimension mismatch");
  const Eigen::MatrixXd bbt = B * B.transpose();
  Eigen::MatrixXd diff = bbt - A * A.transpose();
  diff = 0.5 * (diff + diff.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff, Eigen::EigenvaluesOnly);
  const double lambda_min = es.eigenvalues().minCoeff();
  const double tol_eff = tol * (1.0 + bbt.norm());

  OrderVerdict v;
  v.tolerance = tol_eff;
  v.worst_violation = std::max(0.0, -lambda_min);
  v.status = v.worst_violation <= tol_eff ? OrderStatus::Holds : OrderStatus::Fails;
  v.witness = format_witness("lambda_min=%.6g", lambda_min);
  return v;
}

OrderVerdict gaussian_convex_order_check(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                         int sample_count, int direction_count,
                                         int threshold_count, std::uint64_t seed) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("gaussian_convex_order_check: dimension mismatch");
  const int d = static_cast<int>(A.rows());
  const int q = static_cast<int>(A.cols());
  const CounterRng rng(seed);

  // Common draws for both sides; the standard error of the pairwise
  // difference is what the margin uses.
  Eigen::MatrixXd Z(q, sample_count);
  for (int s = 0; s < sample_count; ++s)
    for (int j = 0; j < q; ++j) Z(j, s) = rng.normal(s, 0, j);
  const Eigen::MatrixXd AZ = A * Z;
  const Eigen::MatrixXd BZ = B * Z;

  OrderVerdict v;
  v.tolerance = 0.0;
  v.status = OrderStatus::Holds;
  std::vector<double> diffs(sample_count);

  auto test = [&](auto&& f, const std::string& name) {
    for (int s = 0; s < sample_count; ++s) diffs[s] = f(AZ.col(s)) - f(BZ.col(s));
    const MeanStdErr st = mean_std_err(diffs);
    const double violation = st.mean - 3.0 * st.std_err;
    if (violation > v.worst_violation) {
      v.worst_violation = violation;
      v.witness = name;
    }
  };

  test([](const auto& x) { return x.norm(); }, "f=|.|");

  for (int u_idx = 0; u_idx < direction_count; ++u_idx) {
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) u(i) = rng.normal(1000000 + u_idx, 1, i);
    const double nrm = u.norm();
    if (nrm == 0.0) continue;
    u /= nrm;
    // threshold grid over the pooled projected range
    double lo = 0.0, hi = 0.0;
    for (int s = 0; s < sample_count; ++s) {
      lo = std::min({lo, u.dot(AZ.col(s)), u.dot(BZ.col(s))});
      hi = std::max({hi, u.dot(AZ.col(s)), u.dot(BZ.col(s))});
    }
    for (int t = 0; t < threshold_count; ++t) {
      const double k = lo + (hi - lo) * (t + 0.5) / threshold_count;
      test([&u, k](const auto& x) { return std::max(u.dot(x) - k, 0.0); },
           format_witness("call dir %g k=%.4g", u_idx, k));
    }
  }

  if (v.worst_violation > 0.0) v.status = OrderStatus::Fails;
  return v;
}

OrderVerdict convex_order_1d(std::span<const double> u, std::span<const double> v,
                             std::span<const double> thresholds, ConvexOrderMode mode) {
  if (u.empty() || v.empty()) throw std::invalid_argument("convex_order_1d: empty samples");

  OrderVerdict verdict;
  verdict.tolerance = 0.0;
  verdict.status = OrderStatus::Holds;

  std::vector<double> fu(u.size()), fv(v.size());
  auto margin_check = [&](auto&& f, const std::string& name, bool absolute) {
    for (std::size_t i = 0; i < u.size(); ++i) fu[i] = f(u[i]);
    for (std::size_t i = 0; i < v.size(); ++i) fv[i] = f(v[i]);
    const MeanStdErr su = mean_std_err(fu);
    const MeanStdErr sv = mean_std_err(fv);
    const double se = std::sqrt(su.std_err * su.std_err + sv.std_err * sv.std_err);
    const double gap = absolute ? std::abs(su.mean - sv.mean) : su.mean - sv.mean;
    const double violation = gap - 3.0 * se;
    if (violation > verdict.worst_violation) {
      verdict.worst_violation = violation;
      verdict.witness = name;
    }
  };

  if (mode == ConvexOrderMode::Cvx)
    margin_check([](double x) { return x; }, "mean equality", /*absolute=*/true);

  for (double k : thresholds) {
    if (mode == ConvexOrderMode::Dcx)
      margin_check([k](double x) { return std::max(k - x, 0.0); },
                   format_witness("threshold k=%.6g (k-x)+", k), false);
    else
      margin_check([k](double x) { return std::max(x - k, 0.0); },
                   format_witness("threshold k=%.6g (x-k)+", k), false);
  }

  if (verdict.worst_violation > 0.0) verdict.status = OrderStatus::Fails;
  return verdict;
}

namespace {

// Worst convexity defect of f over the triple grid: midpoint form
// lam f(x) + (1-lam) f(y) - f(lam x + (1-lam) y), must be >= -tol.
template <typename F>
std::pair<double, double> convexity_defect(F&& f, std::span<const double> xs,
                                           std::span<const double> lambdas) {
  double worst = 0.0, arg = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      for (double lam : lambdas) {
        const double mid = lam * xs[i] + (1.0 - lam) * xs[j];
        const double defect = lam * f(xs[i]) + (1.0 - lam) * f(xs[j]) - f(mid);
        if (defect < worst) {
          worst = defect;
          arg = mid;
        }
      }
    }
  }
  return {-worst, arg};  // violation >= 0
}

}  // namespace

OrderVerdict check_matrix_field_convexity(const VolField& field, std::span<const double> xs,
                                          std::span<const double> lambdas, double tol) {
  OrderVerdict v;
  v.tolerance = tol;

  if (field.structural_form() == VolStructure::Opaque) {
    v.status = OrderStatus::Indeterminate;
    v.witness = "opaque field: structure not certifiable";
    return v;
  }

  if (field.structural_form() == VolStructure::RowDiagOrthogonal) {
    const auto& scalings = field.diag_scalings();
    if (scalings.empty())
      throw std::invalid_argument("check_matrix_field_convexity: field lacks diagonal scalings");
    for (std::size_t i = 0; i < scalings.size(); ++i) {
      auto abs_lambda = [&](double x) { return std::abs(scalings[i](x)); };
      const auto [violation, arg] = convexity_defect(abs_lambda, xs, lambdas);
      if (violation > v.worst_violation) {
        v.worst_violation = violation;
        v.witness = format_witness("|lambda_%g| near x=%.6g", static_cast<double>(i + 1), arg);
      }
    }
  } else {  // Scalar
    if (field.rows() != 1 || field.cols() != 1)
      throw std::invalid_argument("check_matrix_field_convexity: scalar tag on non-scalar field");
    std::vector<double> times = field.has_step_grid()
                                    ? [&] {
                                        std::vector<double> ts(field.steps());
                                        for (int l = 0; l < field.steps(); ++l)
                                          ts[l] = field.step_time(l);
                                        return ts;
                                      }()
                                    : std::vector<double>{0.0};
    for (double t : times) {
      auto abs_sigma = [&](double x) { return std::abs(field.instantaneous(t, x)(0, 0)); };
      const auto [violation, arg] = convexity_defect(abs_sigma, xs, lambdas);
      if (violation > v.worst_violation) {
        v.worst_violation = violation;
        v.witness = format_witness("|sigma| at t=%.4g near x=%.6g", t, arg);
      }
    }
  }

  v.status = v.worst_violation <= tol ? OrderStatus::Holds : OrderStatus::Fails;
  return v;
}

SemiConvexityReport estimate_semiconvexity(const std::function<double(double)>& sigma, double lo,
                                           double hi, int points) {
  if (points < 1000)
    throw std::invalid_argument("estimate_semiconvexity: need at least 1000 grid nodes");
  if (!(hi > lo)) throw std::invalid_argument("estimate_semiconvexity: empty domain");

  const double step = (hi - lo) / (points - 1);
  std::vector<double> sq(points);
  for (int i = 0; i < points; ++i) {
    const double s = sigma(lo + step * i);
    if (!std::isfinite(s))
      throw std::invalid_argument("estimate_semiconvexity: sigma not finite on the grid");
    sq[i] = s * s;
  }

  SemiConvexityReport rep;
  rep.grid_points = points;
  rep.min_second_diff = 0.0;
  for (int i = 1; i + 1 < points; ++i) {
    const double dd = (sq[i - 1] - 2.0 * sq[i] + sq[i + 1]) / (step * step);
    if (dd < rep.min_second_diff) {
      rep.min_second_diff = dd;
      rep.argmin_x = lo + step * i;
    }
  }
  rep.a_sigma = std::max(0.0, -rep.min_second_diff) / 2.0;
  return rep;
}

LipschitzChainBound lipschitz_chain_bound(int k, int m, double h, double kappa_sup,
                                          double sigma_lip, std::span<const double> payoff_lips,
                                          double penalty_lip) {
  if (!(h > 0.0)) throw std::invalid_argument("lipschitz_chain_bound: h must be > 0");
  const int n = static_cast<int>(payoff_lips.size());
  if (k < 0 || k > n) throw std::invalid_argument("lipschitz_chain_bound: k out of range");

  LipschitzChainBound out;
  const double c_ks = kappa_sup + 0.5 * sigma_lip * sigma_lip;
  out.growth_constant = 1.0 + h * c_ks;

  double bound = 0.0;
  for (int i = k; i <= n; ++i) {
    const double power = std::pow(out.growth_constant, static_cast<double>(m) * i);
    out.step_powers.push_back(power);
    out.exp_envelope.push_back(std::exp(static_cast<double>(i) * m * h * c_ks));
    bound += power * (i < n ? payoff_lips[i] : penalty_lip);
  }
  out.bound = bound;
  return out;
}

double drift_monotonicity_coefficient(const std::function<double(double)>& beta, double lo,
                                      double hi, int points) {
  if (points < 1000)
    throw std::invalid_argument("drift_monotonicity_coefficient: need at least 1000 grid nodes");
  const double step = (hi - lo) / (points - 1);
  double min_slope = 0.0;
  for (int i = 0; i + 1 < points; ++i) {
    const double slope = (beta(lo + step * (i + 1)) - beta(lo + step * i)) / step;
    min_slope = std::min(min_slope, slope);
  }
  return std::max(0.0, -min_slope);
}

}  // namespace swing
