#pragma once

// Cost model of online optimization with (multi-step) memory costs:
//
//   minimize  sum_t f(x_t, y_t) + || x_t - sum_i C_i x_{t-i} ||_p
//
// with the actions x_{-q+1..0} given as part of the instance.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "erl/norms.hpp"

namespace erl {

// Newest-first window of past actions: history[0] = x_{t-1}, history[1] = x_{t-2}, ...
using History = std::vector<Vector>;

class MemorySpec {
 public:
  // Single-step memory: q = 1, C_1 = I.
  static MemorySpec single_step(int dim, double p = 2.0);
  // Scalar coefficients c_i times the identity.
  static MemorySpec scaled_identity(int dim, const std::vector<double>& coeffs, double p = 2.0);

  MemorySpec(std::vector<Matrix> coeffs, double p = 2.0);

  int q() const { return static_cast<int>(coeffs_.size()); }
  int dim() const { return static_cast<int>(coeffs_.front().rows()); }
  double p() const { return p_; }
  // C_i for i = 1..q.
  const Matrix& coeff(int i) const { return coeffs_.at(static_cast<std::size_t>(i - 1)); }
  const std::vector<Matrix>& coeffs() const { return coeffs_; }
  // sum_i ||C_i|| with the matrix norm induced by l_p.
  double beta() const;
  // sum_i C_i * history[i-1].
  Vector predicted(const History& history) const;

 private:
  std::vector<Matrix> coeffs_;
  double p_;
};

// Pluggable hitting cost f(x, y). Robust needs minimizer(); the scalar
// projection fast path needs norm_weight().
class HittingCost {
 public:
  virtual ~HittingCost() = default;
  virtual double value(const Vector& x, const Vector& y) const = 0;
  // Unique minimizer of f(., y), or nullopt if the model has none.
  virtual std::optional<Vector> minimizer(const Vector& y) const = 0;
  virtual Vector subgradient(const Vector& x, const Vector& y) const = 0;
  virtual Matrix hessian(const Vector& x, const Vector& y) const = 0;
  // alpha such that f(x,y) - f(x*,y) >= alpha ||x - x*||_p.
  virtual double sharpness() const = 0;
  // w if f(x, y) = w * ||x - y||_p exactly.
  virtual std::optional<double> norm_weight() const { return std::nullopt; }
};

// f(x, y) = alpha * ||x - y||_p.
class NormHittingCost final : public HittingCost {
 public:
  NormHittingCost(double alpha, double p);
  double value(const Vector& x, const Vector& y) const override;
  std::optional<Vector> minimizer(const Vector& y) const override { return y; }
  Vector subgradient(const Vector& x, const Vector& y) const override;
  Matrix hessian(const Vector& x, const Vector& y) const override;
  double sharpness() const override { return alpha_; }
  std::optional<double> norm_weight() const override { return alpha_; }
  double p() const { return p_; }

 private:
  double alpha_;
  double p_;
};

struct Instance {
  // x_{-q+1..0}, oldest first; size q.
  std::vector<Vector> initial;
  std::vector<Vector> contexts;  // y_1..y_T
  double alpha = 0.2;
  MemorySpec memory = MemorySpec::single_step(1);

  // Instance whose q initial actions all equal x0.
  static Instance make(Vector x0, std::vector<Vector> contexts, double alpha,
                       MemorySpec memory);
  static Instance scalar(double x0, const std::vector<double>& contexts, double alpha);

  int horizon() const { return static_cast<int>(contexts.size()); }
  int dim() const { return memory.dim(); }
  double p() const { return memory.p(); }
  const Vector& context(int t) const;  // 1-based
  // Newest-first initial window x_0, x_{-1}, ..., x_{-q+1}.
  History initial_history() const;
  NormHittingCost hitting() const { return NormHittingCost(alpha, memory.p()); }
  // Throws DimensionError/DomainError when the invariants do not hold.
  void validate() const;
};

// Append-only per-step cost record. cum_[0] = 0, cum_[t] = cum_[t-1] + hit + mem.
class CostLedger {
 public:
  void append(Vector action, double hit, double mem);
  std::size_t steps() const { return hit_.size(); }
  double hit(std::size_t t) const { return hit_.at(t - 1); }
  double mem(std::size_t t) const { return mem_.at(t - 1); }
  // Cumulative cost after t steps; cum(0) == 0.
  double cum(std::size_t t) const { return cum_.at(t); }
  double total() const { return cum_.back(); }
  const std::vector<Vector>& actions() const { return actions_; }
  const std::vector<double>& hits() const { return hit_; }
  const std::vector<double>& mems() const { return mem_; }

 private:
  std::vector<double> hit_;
  std::vector<double> mem_;
  std::vector<double> cum_{0.0};
  std::vector<Vector> actions_;
};

struct Trajectory {
  std::vector<Vector> actions;
  CostLedger ledger;
};

double hitting_cost(const Vector& x, const Vector& y, double alpha, double p);
double memory_cost(const Vector& x, const History& history, const MemorySpec& spec);

struct StepCost {
  double hit;
  double mem;
};
StepCost step_cost(const Instance& inst, int t, const Vector& x, const History& history);

// Pushes x to the front of a newest-first window and drops the oldest entry.
void push_history(History& history, const Vector& x);

// Replays actions through the instance's cost model.
Trajectory evaluate(const Instance& inst, const std::vector<Vector>& actions);
double total_cost(const Instance& inst, const Trajectory& traj);

// Scalar helpers.
std::vector<Vector> to_vectors(std::span<const double> values);
std::vector<double> to_scalars(const std::vector<Vector>& values);

}  // namespace erl
