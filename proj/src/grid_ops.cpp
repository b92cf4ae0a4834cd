#include "grid_ops.hpp"

#include <cmath>
#include <utility>

namespace swing::detail {

SubstepOperator::SubstepOperator(UniformGrid grid, std::vector<double> a, std::vector<double> b,
                                 int quad_nodes)
    : grid_(grid), a_(std::move(a)), b_(std::move(b)) {
  const QuadratureRule& rule = gauss_hermite_normal(quad_nodes);
  const int n = static_cast<int>(rule.nodes.size());
  for (int j = 0; j < n; ++j) {
    if (rule.nodes[j] > 0.0) {
      half_nodes_.push_back(rule.nodes[j]);
      half_weights_.push_back(rule.weights[j]);
    } else if (rule.nodes[j] == 0.0) {
      center_weight_ = rule.weights[j];
    }
  }
}

void SubstepOperator::apply(std::span<const double> f, std::span<double> out,
                            long* extrap) const {
  const int n = grid_.n;
  long hits = 0;
  // node-parallel when not already inside a parallel region (nesting is off)
#pragma omp parallel for schedule(static) reduction(+ : hits)
  for (int i = 0; i < n; ++i) {
    const double a = a_[i];
    const double b = b_[i];
    if (b == 0.0) {
      out[i] = interp_linear(grid_, f, a, &hits);
      continue;
    }
    double acc = center_weight_ != 0.0 ? center_weight_ * interp_linear(grid_, f, a, &hits) : 0.0;
    for (std::size_t j = 0; j < half_nodes_.size(); ++j) {
      const double shift = b * half_nodes_[j];
      acc += half_weights_[j] *
             (interp_linear(grid_, f, a + shift, &hits) + interp_linear(grid_, f, a - shift, &hits));
    }
    out[i] = acc;
  }
  if (extrap) *extrap += hits;
}

void SubstepOperator::scatter(std::span<const double> mu, std::span<double> out) const {
  const int n = grid_.n;
  for (int i = 0; i < n; ++i) {
    const double m = mu[i];
    if (m == 0.0) continue;
    const double a = a_[i];
    const double b = b_[i];
    if (b == 0.0) {
      const Deposit d = deposit_linear(grid_, a);
      out[d.i0] += m * d.w0;
      out[d.i1] += m * d.w1;
      continue;
    }
    if (center_weight_ != 0.0) {
      const Deposit d = deposit_linear(grid_, a);
      out[d.i0] += m * center_weight_ * d.w0;
      out[d.i1] += m * center_weight_ * d.w1;
    }
    for (std::size_t j = 0; j < half_nodes_.size(); ++j) {
      const double shift = b * half_nodes_[j];
      const double w = m * half_weights_[j];
      const Deposit up = deposit_linear(grid_, a + shift);
      out[up.i0] += w * up.w0;
      out[up.i1] += w * up.w1;
      const Deposit dn = deposit_linear(grid_, a - shift);
      out[dn.i0] += w * dn.w0;
      out[dn.i1] += w * dn.w1;
    }
  }
}

}  // namespace swing::detail
