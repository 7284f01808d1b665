#include "erl/norms.hpp"

#include <cmath>

#include "erl/error.hpp"

namespace erl {

namespace {

void check_order(double p) {
  if (!(p >= 1.0)) throw DomainError("norm order p must be >= 1");
}

}  // namespace

double lp_norm(const Vector& z, double p) {
  check_order(p);
  if (z.size() == 1) return std::abs(z[0]);
  if (p == 1.0) return z.lpNorm<1>();
  if (p == 2.0) return z.norm();
  if (std::isinf(p)) return z.size() == 0 ? 0.0 : z.lpNorm<Eigen::Infinity>();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) acc += std::pow(std::abs(z[i]), p);
  return std::pow(acc, 1.0 / p);
}

Vector lp_norm_subgradient(const Vector& z, double p) {
  check_order(p);
  Vector g = Vector::Zero(z.size());
  const double n = lp_norm(z, p);
  if (n == 0.0) return g;
  if (p == 1.0) {
    for (Eigen::Index i = 0; i < z.size(); ++i) g[i] = (z[i] > 0) - (z[i] < 0);
    return g;
  }
  if (p == 2.0) return z / n;
  if (std::isinf(p)) {
    Eigen::Index arg = 0;
    z.cwiseAbs().maxCoeff(&arg);
    g[arg] = z[arg] > 0 ? 1.0 : -1.0;
    return g;
  }
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double s = (z[i] > 0) - (z[i] < 0);
    g[i] = s * std::pow(std::abs(z[i]) / n, p - 1.0);
  }
  return g;
}

Matrix lp_norm_hessian(const Vector& z, double p) {
  check_order(p);
  const auto d = z.size();
  Matrix h = Matrix::Zero(d, d);
  const double n = lp_norm(z, p);
  if (n == 0.0 || p == 1.0 || std::isinf(p)) return h;
  if (p == 2.0) {
    const Vector u = z / n;
    h = (Matrix::Identity(d, d) - u * u.transpose()) / n;
    return h;
  }
  // H = (p-1)/n * (diag(|u|^(p-2)) - g g^T) with u = z/n and g the gradient.
  const Vector g = lp_norm_subgradient(z, p);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double ui = std::abs(z[i]) / n;
    if (ui > 0.0) h(i, i) = std::pow(ui, p - 2.0);
  }
  h -= g * g.transpose();
  h *= (p - 1.0) / n;
  return h;
}

double induced_norm(const Matrix& a, double p) {
  check_order(p);
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
  const double col_sum = a.cwiseAbs().colwise().sum().maxCoeff();
  const double row_sum = a.cwiseAbs().rowwise().sum().maxCoeff();
  if (p == 1.0) return col_sum;
  if (std::isinf(p)) return row_sum;
  if (p == 2.0) {
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
  }
  return std::pow(col_sum, 1.0 / p) * std::pow(row_sum, 1.0 - 1.0 / p);
}

}  // namespace erl
