#pragma once

#include <cstdint>

namespace swing {

// SplitMix64 finalizer, used as the mixing round of the counter-based
// generator below.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Inverse standard normal CDF, accurate to full double precision.
double inverse_normal_cdf(double p);

// Standard normal CDF and density.
double normal_cdf(double x);
double normal_pdf(double x);

// Counter-based Gaussian stream. Each draw is addressed by
// (path, step, component), so parallel workers can fill a path ensemble in
// any order and still produce the sequence a serial loop would.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  // Uniform draw in the open interval (0, 1).
  double uniform(std::uint64_t path, std::uint64_t step, std::uint32_t dim) const {
    const std::uint64_t h = mix64(seed_ ^ mix64(path ^ mix64(step ^ mix64(dim))));
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(std::uint64_t path, std::uint64_t step, std::uint32_t dim) const {
    return inverse_normal_cdf(uniform(path, step, dim));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace swing
