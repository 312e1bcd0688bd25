#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

#include "lvmut/model.hpp"

namespace testing {

using lvmut::Matrix;
using lvmut::Vector;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * (static_cast<double>(gen_() >> 11) * 0x1.0p-53);
  }
  std::size_t index(std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(gen_() % (hi - lo + 1)); }
  Vector vector(std::size_t n, double lo, double hi) {
    Vector v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

/// Symmetric, fully connected mu with row sums at `fill` times r_i / 2.
inline Matrix random_h3_mu(Rng& rng, const Vector& r, double fill) {
  const std::size_t n = r.size();
  Matrix mu(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) mu(i, j) = mu(j, i) = rng.uniform(0.05, 1.0);
  double scale = 1e300;
  for (std::size_t i = 0; i < n; ++i) scale = std::min(scale, 0.5 * r[i] / lvmut::sum(mu.row(i)));
  return (fill * scale) * mu;
}

/// Random fitness-weighted model satisfying H1-H3 strictly.
inline lvmut::Model random_fitness_model(Rng& rng, std::size_t n) {
  const Vector r = rng.vector(n, 0.5, 2.0);
  return lvmut::build_model(n, r, rng.uniform(1.0, 50.0), random_h3_mu(rng, r, rng.uniform(0.1, 0.9)),
                            lvmut::UniformLinear{r});
}

/// Random shared linear competition (a independent of r).
inline lvmut::Model random_uniform_model(Rng& rng, std::size_t n) {
  const Vector r = rng.vector(n, 0.5, 2.0);
  return lvmut::build_model(n, r, rng.uniform(1.0, 50.0), random_h3_mu(rng, r, rng.uniform(0.1, 0.9)),
                            lvmut::UniformLinear{rng.vector(n, 0.3, 2.0)});
}

inline lvmut::Model random_crowding_model(Rng& rng, std::size_t n) {
  const Vector r = rng.vector(n, 0.5, 2.0);
  Matrix alpha(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) alpha(i, j) = rng.uniform(0.7, 1.3);
  return lvmut::build_model(n, r, rng.uniform(1.0, 50.0), random_h3_mu(rng, r, rng.uniform(0.1, 0.9)),
                            lvmut::CrowdingLinear{alpha});
}

inline lvmut::Model random_perturbed_model(Rng& rng, std::size_t n, double eps) {
  const Vector r = rng.vector(n, 0.5, 2.0);
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) = rng.uniform(-1.0, 1.0);
  return lvmut::build_model(n, r, rng.uniform(1.0, 50.0), random_h3_mu(rng, r, rng.uniform(0.1, 0.9)),
                            lvmut::Perturbed{lvmut::UniformLinear{r}, eps, rng.vector(n, -1.0, 1.0), w});
}

}  // namespace testing
