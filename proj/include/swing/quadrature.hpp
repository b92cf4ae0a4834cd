#pragma once

#include <vector>

namespace swing {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Rule for E f(Z) with Z ~ N(0,1): sum_j w_j f(z_j). Nodes are exactly
// symmetric about zero (mirrored in code, not just by the eigensolver), so
// odd moments vanish without rounding residue.
const QuadratureRule& gauss_hermite_normal(int n);

// Rule for the integral of f over [-1, 1].
const QuadratureRule& gauss_legendre(int n);

}  // namespace swing
