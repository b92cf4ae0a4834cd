#pragma once

#include "swing/schemes.hpp"

#include <span>
#include <vector>

// Serial reference implementations of the parallel kernels, kept for testing
// and benchmarked against the OpenMP versions. Results must be bit-identical
// to the parallel kernels.
namespace swing::reference {

PathEnsemble simulate_paths(const Diffusion1D& dyn, double x0, double maturity, int n,
                            const SchemeConfig& config, bool truncated);

// One quadrature transition sweep over every grid node, plain loop.
std::vector<double> transition_sweep(std::span<const double> f, std::span<const double> x_grid,
                                     double t, const Diffusion1D& dyn, double h, int node_count);

}  // namespace swing::reference
