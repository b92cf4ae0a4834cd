#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace swing {

// Execution policy for the data-parallel kernels. The serial policy runs the
// reference loops kept for testing; results are bit-identical either way
// because every reduction is performed in index order on a pre-filled buffer.
enum class ExecPolicy { Serial, OpenMP };

int hardware_threads();

// Index-ordered sum: independent of how many workers filled the buffer.
double sum_ordered(std::span<const double> xs);

struct MeanStdErr {
  double mean = 0.0;
  double std_err = 0.0;
};

MeanStdErr mean_std_err(std::span<const double> xs);

}  // namespace swing
