#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "erl/core.hpp"

namespace erl::test {

inline std::vector<double> uniform_values(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = u(rng);
  return v;
}

// Scalar instance with y_t ~ U(lo, hi) and x0 ~ U(lo, hi).
inline Instance random_scalar(std::mt19937_64& rng, int horizon, double alpha, double lo = 0.0, double hi = 10.0) {
  const auto y = uniform_values(rng, horizon, lo, hi);
  const double x0 = uniform_values(rng, 1, lo, hi)[0];
  return Instance::scalar(x0, y, alpha);
}

// Scalar instance with memory coefficients c_1..c_q (times the identity).
inline Instance random_scalar_memory(std::mt19937_64& rng, int horizon, double alpha, const std::vector<double>& coeffs,
                                     double lo = 0.0, double hi = 10.0) {
  Instance inst;
  inst.memory = MemorySpec::scaled_identity(1, coeffs);
  for (double v : uniform_values(rng, static_cast<int>(coeffs.size()), lo, hi)) {
    inst.initial.push_back(Vector::Constant(1, v));
  }
  inst.contexts = to_vectors(uniform_values(rng, horizon, lo, hi));
  inst.alpha = alpha;
  inst.validate();
  return inst;
}

inline Instance random_vector(std::mt19937_64& rng, int horizon, int dim, double alpha, double p = 2.0) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Vector x0(dim);
  for (int k = 0; k < dim; ++k) x0[k] = u(rng);
  std::vector<Vector> ctx;
  for (int t = 0; t < horizon; ++t) {
    Vector y(dim);
    for (int k = 0; k < dim; ++k) y[k] = u(rng);
    ctx.push_back(y);
  }
  return Instance::make(x0, ctx, alpha, MemorySpec::single_step(dim, p));
}

}  // namespace erl::test
