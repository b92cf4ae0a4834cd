// Timing comparison of the OpenMP kernels against the serial reference
// implementations: path simulation and the quadrature transition sweep.

#include "swing/reference.hpp"
#include "swing/schemes.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

swing::Diffusion1D forward_field() {
  swing::Diffusion1D dyn;
  dyn.sigma = [](double t, double x) { return 0.7 * x * std::exp(-0.4 * (1.0 - t)); };
  dyn.sigma_lip = 0.7;
  return dyn;
}

}  // namespace

int main(int argc, char** argv) {
  int paths = 200000;
  int sweeps = 400;
  if (argc > 1) paths = std::atoi(argv[1]);
  if (argc > 2) sweeps = std::atoi(argv[2]);

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif

  const swing::Diffusion1D dyn = forward_field();
  swing::SchemeConfig cfg;
  cfg.m = 4;
  cfg.path_count = paths;
  cfg.seed = 7;

  // path simulation
  auto t0 = clock_type::now();
  const swing::PathEnsemble serial =
      swing::reference::simulate_paths(dyn, 20.0, 1.0, 15, cfg, false);
  const double t_serial = seconds_since(t0);

  t0 = clock_type::now();
  const swing::PathEnsemble parallel =
      swing::simulate_paths(dyn, 20.0, 1.0, 15, cfg, false, swing::ExecPolicy::OpenMP);
  const double t_parallel = seconds_since(t0);

  const bool same_paths =
      serial.raw().size() == parallel.raw().size() &&
      std::memcmp(serial.raw().data(), parallel.raw().data(),
                  serial.raw().size() * sizeof(double)) == 0;

  std::printf("simulate_paths   %8d paths   serial %8.3fs   openmp %8.3fs   speedup %5.2fx   %s\n",
              paths, t_serial, t_parallel, t_serial / t_parallel,
              same_paths ? "bit-identical" : "MISMATCH");

  // quadrature transition sweep
  const int nx = 1601;
  std::vector<double> grid(nx), f(nx);
  for (int i = 0; i < nx; ++i) {
    grid[i] = 60.0 * i / (nx - 1);
    f[i] = std::max(grid[i] - 20.0, 0.0);
  }

  t0 = clock_type::now();
  std::vector<double> out_serial;
  for (int s = 0; s < sweeps; ++s)
    out_serial = swing::reference::transition_sweep(f, grid, 0.5, dyn, 1e-3, 32);
  const double t_sweep_serial = seconds_since(t0);

  t0 = clock_type::now();
  std::vector<double> out_parallel;
  for (int s = 0; s < sweeps; ++s) {
    const swing::TransitionResult res = swing::quadrature_transition(f, grid, 0.5, dyn, 1e-3, 32);
    out_parallel = res.values;
  }
  const double t_sweep_parallel = seconds_since(t0);

  const bool same_sweep = out_serial == out_parallel;
  std::printf("transition_sweep %8d loops   serial %8.3fs   openmp %8.3fs   speedup %5.2fx   %s\n",
              sweeps, t_sweep_serial, t_sweep_parallel, t_sweep_serial / t_sweep_parallel,
              same_sweep ? "bit-identical" : "MISMATCH");

  return same_paths && same_sweep ? 0 : 1;
}
