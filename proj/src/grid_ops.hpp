#pragma once

#include "swing/quadrature.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace swing::detail {

struct UniformGrid {
  double x0 = 0.0;
  double dx = 1.0;
  int n = 0;

  double x(int i) const { return x0 + dx * i; }

  static UniformGrid from_points(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("grid needs at least two nodes");
    UniformGrid g{xs[0], (xs.back() - xs.front()) / (static_cast<double>(xs.size()) - 1.0),
                  static_cast<int>(xs.size())};
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (std::abs(xs[i] - g.x(static_cast<int>(i))) > 1e-9 * (1.0 + std::abs(xs[i])))
        throw std::invalid_argument("grid must be uniform");
    return g;
  }

  std::vector<double> points() const {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = x(i);
    return xs;
  }
};

// Piecewise-linear evaluation with linear continuation outside the grid.
inline double interp_linear(const UniformGrid& g, std::span<const double> f, double y,
                            long* extrap) {
  const double u = (y - g.x0) / g.dx;
  if (u <= 0.0) {
    if (u < 0.0 && extrap) ++*extrap;
    return f[0] + (f[1] - f[0]) * u;
  }
  if (u >= g.n - 1) {
    if (u > g.n - 1 && extrap) ++*extrap;
    return f[g.n - 1] + (f[g.n - 1] - f[g.n - 2]) * (u - (g.n - 1));
  }
  const int i = static_cast<int>(u);
  const double w = u - i;
  return f[i] * (1.0 - w) + f[i + 1] * w;
}

// Deposit weights of the adjoint of interp_linear at y: two (index, weight)
// pairs; extrapolated points map to signed weights on the edge node pair so
// the scatter stays the exact transpose of the gather.
struct Deposit {
  int i0, i1;
  double w0, w1;
};

inline Deposit deposit_linear(const UniformGrid& g, double y) {
  const double u = (y - g.x0) / g.dx;
  if (u <= 0.0) return {0, 1, 1.0 - u, u};
  if (u >= g.n - 1) {
    const double w = u - (g.n - 1);
    return {g.n - 1, g.n - 2, 1.0 + w, -w};
  }
  const int i = static_cast<int>(u);
  const double w = u - i;
  return {i, i + 1, 1.0 - w, w};
}

// One Markov sub-step on the grid: from node i the state moves to
// y = a_i + b_i z with z ~ N(0,1) integrated by Gauss-Hermite. apply() is the
// backward expectation, scatter() the forward transport of a measure.
class SubstepOperator {
 public:
  SubstepOperator(UniformGrid grid, std::vector<double> a, std::vector<double> b, int quad_nodes);

  const UniformGrid& grid() const { return grid_; }

  void apply(std::span<const double> f, std::span<double> out, long* extrap) const;
  void scatter(std::span<const double> mu, std::span<double> out) const;

 private:
  UniformGrid grid_;
  std::vector<double> a_, b_;
  std::vector<double> half_nodes_, half_weights_;  // strictly positive z
  double center_weight_ = 0.0;                     // weight at z = 0, if any
};

}  // namespace swing::detail
