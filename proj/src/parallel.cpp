#include "swing/parallel.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace swing {

int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double sum_ordered(std::span<const double> xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc;
}

MeanStdErr mean_std_err(std::span<const double> xs) {
  MeanStdErr out;
  const std::size_t n = xs.size();
  if (n == 0) return out;
  out.mean = sum_ordered(xs) / static_cast<double>(n);
  if (n < 2) return out;
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - out.mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(n - 1);
  out.std_err = std::sqrt(var / static_cast<double>(n));
  return out;
}

}  // namespace swing
