#pragma once

#include <limits>

#include <Eigen/Dense>

namespace erl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

// l_p vector norm, p >= 1 (p = inf allowed).
double lp_norm(const Vector& z, double p);

// A subgradient of ||z||_p. At z = 0 the zero subgradient is returned, as is
// every component-wise kink of the l_1 and l_inf norms.
Vector lp_norm_subgradient(const Vector& z, double p);

// Hessian of ||z||_p where it exists; zero at z = 0 and for p in {1, inf}.
Matrix lp_norm_hessian(const Vector& z, double p);

// Matrix norm induced by the l_p vector norm. Exact for p in {1, 2, inf} and
// for 1x1 matrices; for other p the Riesz-Thorin bound
// ||A||_1^(1/p) * ||A||_inf^(1-1/p) is returned, which only over-estimates.
double induced_norm(const Matrix& a, double p);

}  // namespace erl
