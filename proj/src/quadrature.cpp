#include "swing/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace swing {

namespace {

// Golub-Welsch on the Jacobi matrix of the weight's orthogonal polynomials:
// nodes are the eigenvalues, weights mu0 * v0^2.
QuadratureRule golub_welsch(const std::vector<double>& offdiag, double mu0) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    J(i, i + 1) = offdiag[i];
    J(i + 1, i) = offdiag[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

// Force exact node symmetry: mirror the positive half, pin the middle at 0.
void symmetrize(QuadratureRule& rule) {
  const int n = static_cast<int>(rule.nodes.size());
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double node = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -node;
    rule.nodes[j] = node;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
}

}  // namespace

const QuadratureRule& gauss_hermite_normal(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_normal: need n >= 1");
  static std::map<int, QuadratureRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Probabilists' Hermite: weight e^{-x^2/2}/sqrt(2 pi), beta_j = sqrt(j).
  std::vector<double> beta(n - 1);
  for (int j = 1; j < n; ++j) beta[j - 1] = std::sqrt(static_cast<double>(j));
  QuadratureRule rule = golub_welsch(beta, 1.0);
  symmetrize(rule);
  return cache.emplace(n, std::move(rule)).first->second;
}

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  static std::map<int, QuadratureRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> beta(n - 1);
  for (int j = 1; j < n; ++j)
    beta[j - 1] = j / std::sqrt(4.0 * j * j - 1.0);
  QuadratureRule rule = golub_welsch(beta, 2.0);
  symmetrize(rule);
  return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace swing
