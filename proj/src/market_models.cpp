#include "swing/market_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace swing {

double ModelSpec::initial_forward(double t) const {
  if (f0_values.empty()) return f0;
  if (f0_times.size() != f0_values.size())
    throw std::invalid_argument("ModelSpec: f0_times and f0_values must align");
  if (t <= f0_times.front()) return f0_values.front();
  if (t >= f0_times.back()) return f0_values.back();
  const auto it = std::upper_bound(f0_times.begin(), f0_times.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - f0_times.begin());
  const double w = (t - f0_times[j - 1]) / (f0_times[j] - f0_times[j - 1]);
  return f0_values[j - 1] * (1.0 - w) + f0_values[j] * w;
}

void ModelSpec::validate() const {
  const int q = factor_count;
  if (q < 1) throw std::invalid_argument("ModelSpec: factor_count must be >= 1");
  if (static_cast<int>(mean_reversions.size()) != q)
    throw std::invalid_argument("ModelSpec: alpha list must have factor_count entries");
  if (static_cast<int>(vols.size()) != q)
    throw std::invalid_argument("ModelSpec: sigma list must have factor_count entries");
  for (double a : mean_reversions)
    if (!(a > 0.0)) throw std::invalid_argument("ModelSpec: all alpha_i must be > 0");
  for (double s : vols)
    if (!(s >= 0.0)) throw std::invalid_argument("ModelSpec: all sigma_i must be >= 0");
  if (q >= 2) {
    const double lo = -1.0 / (q - 1);
    if (!(rho > lo && rho < 1.0))
      throw std::invalid_argument("ModelSpec: rho must lie strictly inside (-1/(q-1), 1)");
  }
  if (f0_values.empty()) {
    if (!(f0 > 0.0)) throw std::invalid_argument("ModelSpec: f0 must be > 0");
  } else {
    if (f0_times.size() != f0_values.size())
      throw std::invalid_argument("ModelSpec: f0_times and f0_values must align");
    for (double v : f0_values)
      if (!(v > 0.0)) throw std::invalid_argument("ModelSpec: initial curve must be > 0");
  }
}

Eigen::MatrixXd gamma_matrix(double rho, int q) {
  if (q < 2) throw std::invalid_argument("gamma_matrix: need q >= 2");
  const double lo = -1.0 / (q - 1);
  if (!(rho > lo && rho < 1.0))
    throw std::domain_error("gamma_matrix: rho outside (-1/(q-1), 1)");
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(q, q, rho);
  g.diagonal().setOnes();
  return g;
}

Eigen::MatrixXd cholesky_explicit(double rho, int q) {
  if (q < 2) throw std::invalid_argument("cholesky_explicit: need q >= 2");
  const double lo = -1.0 / (q - 1);
  if (!(rho > lo && rho < 1.0))
    throw std::domain_error("cholesky_explicit: rho outside (-1/(q-1), 1)");

  std::vector<double> d(q), l(q);
  d[0] = 1.0;
  l[0] = rho;
  for (int j = 1; j < q; ++j) {
    const double dsq = d[j - 1] * d[j - 1] - l[j - 1] * l[j - 1];
    if (!(dsq > 0.0))
      throw std::domain_error("cholesky_explicit: recurrence left the admissible range");
    d[j] = std::sqrt(dsq);
    l[j] = (rho - 1.0) / d[j] + d[j];
  }

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(q, q);
  for (int i = 0; i < q; ++i) {
    L(i, i) = d[i];
    for (int j = 0; j < i; ++j) L(i, j) = l[j];
  }
  return L;
}

double lambda_sq(double t, const ModelSpec& model) {
  const int q = model.factor_count;
  double acc = 0.0;
  for (int i = 0; i < q; ++i) {
    const double a = model.mean_reversions[i];
    const double s = model.vols[i];
    acc += s * s / (2.0 * a) * (1.0 - std::exp(-2.0 * a * t));
  }
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      if (i == j) continue;
      const double ai = model.mean_reversions[i];
      const double aj = model.mean_reversions[j];
      acc += model.rho * model.vols[i] * model.vols[j] / (ai + aj) *
             (1.0 - std::exp(-(ai + aj) * t));
    }
  }
  return acc;
}

double spot_price(const FactorState& state, const ModelSpec& model) {
  if (state.factors.size() != model.factor_count)
    throw std::invalid_argument("spot_price: state dimension does not match the model");
  double dot = 0.0;
  for (int i = 0; i < model.factor_count; ++i) dot += model.vols[i] * state.factors(i);
  return model.initial_forward(state.time) * std::exp(dot - 0.5 * lambda_sq(state.time, model));
}

VolField::VolField(int d, int q, Eval inst, VolStructure form)
    : d_(d), q_(q), inst_(std::move(inst)), form_(form) {}

void VolField::set_step_grid(std::vector<double> times) { times_ = std::move(times); }

void VolField::set_diag_scalings(std::vector<DiagScaling> scalings) {
  scalings_ = std::move(scalings);
}

Eigen::MatrixXd VolField::instantaneous(double t, const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out = inst_(t, x);
  if (out.rows() != d_ || out.cols() != q_)
    throw std::invalid_argument("VolField: evaluator returned wrong dimensions");
  return out;
}

Eigen::MatrixXd VolField::step_matrix(int ell, const Eigen::VectorXd& x) const {
  return std::sqrt(step_dt(ell)) * instantaneous(step_time(ell), x);
}

Eigen::MatrixXd VolField::instantaneous(double t, double x) const {
  Eigen::VectorXd v(1);
  v(0) = x;
  return instantaneous(t, v);
}

Eigen::MatrixXd VolField::step_matrix(int ell, double x) const {
  Eigen::VectorXd v(1);
  v(0) = x;
  return step_matrix(ell, v);
}

VolField vol_field_multifactor(const ModelSpec& model, double maturity,
                               const std::vector<double>& step_times) {
  model.validate();
  const int q = model.factor_count;
  Eigen::MatrixXd L = q >= 2 ? cholesky_explicit(model.rho, q)
                             : Eigen::MatrixXd::Identity(1, 1);
  auto alphas = model.mean_reversions;
  auto sigmas = model.vols;
  auto inst = [q, L, alphas, sigmas, maturity](double t, const Eigen::VectorXd& x) {
    Eigen::RowVectorXd row(q);
    for (int j = 0; j < q; ++j)
      row(j) = x(0) * sigmas[j] * std::exp(-alphas[j] * (maturity - t));
    return Eigen::MatrixXd(row * L);
  };
  VolField field(1, q, inst, VolStructure::RowDiagOrthogonal);
  field.set_step_grid(step_times);
  // sigma_{rho,k}(x) = A diag(x sqrt(dt_k), ..., x sqrt(dt_k)) with O = I:
  // every diagonal scaling is x itself (the sqrt(dt) factor lives in the
  // step matrix), and |x| is convex.
  std::vector<VolField::DiagScaling> scalings(q, [](double x) { return x; });
  field.set_diag_scalings(std::move(scalings));
  return field;
}

}  // namespace swing
