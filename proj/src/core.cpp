#include "erl/core.hpp"

#include <cmath>
#include <string>

#include "erl/error.hpp"

namespace erl {

namespace {

void require_same_dim(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

MemorySpec::MemorySpec(std::vector<Matrix> coeffs, double p) : coeffs_(std::move(coeffs)), p_(p) {
  if (coeffs_.empty()) throw DomainError("MemorySpec: q must be >= 1");
  if (!(p_ >= 1.0)) throw DomainError("MemorySpec: p must be >= 1");
  const auto d = coeffs_.front().rows();
  if (d < 1) throw DimensionError("MemorySpec: empty coefficient matrix");
  for (const auto& c : coeffs_) {
    if (c.rows() != d || c.cols() != d) throw DimensionError("MemorySpec: coefficients must all be d x d");
    if (!c.allFinite()) throw DomainError("MemorySpec: non-finite coefficient");
  }
}

MemorySpec MemorySpec::single_step(int dim, double p) {
  return MemorySpec({Matrix::Identity(dim, dim)}, p);
}

MemorySpec MemorySpec::scaled_identity(int dim, const std::vector<double>& coeffs, double p) {
  std::vector<Matrix> mats;
  mats.reserve(coeffs.size());
  for (double c : coeffs) mats.push_back(c * Matrix::Identity(dim, dim));
  return MemorySpec(std::move(mats), p);
}

double MemorySpec::beta() const {
  double b = 0.0;
  for (const auto& c : coeffs_) b += induced_norm(c, p_);
  return b;
}

Vector MemorySpec::predicted(const History& history) const {
  if (static_cast<int>(history.size()) != q()) {
    throw DimensionError("memory history has " + std::to_string(history.size()) +
                         " entries, expected q = " + std::to_string(q()));
  }
  Vector acc = Vector::Zero(dim());
  for (int i = 0; i < q(); ++i) {
    if (history[i].size() != dim()) throw DimensionError("memory history: action dimension mismatch");
    acc.noalias() += coeffs_[i] * history[i];
  }
  return acc;
}

NormHittingCost::NormHittingCost(double alpha, double p) : alpha_(alpha), p_(p) {
  if (!(alpha > 0.0)) throw DomainError("hitting cost: alpha must be > 0");
  if (!(p >= 1.0)) throw DomainError("hitting cost: p must be >= 1");
}

double NormHittingCost::value(const Vector& x, const Vector& y) const {
  require_same_dim(x, y, "hitting cost");
  return alpha_ * lp_norm(x - y, p_);
}

Vector NormHittingCost::subgradient(const Vector& x, const Vector& y) const {
  require_same_dim(x, y, "hitting cost");
  return alpha_ * lp_norm_subgradient(x - y, p_);
}

Matrix NormHittingCost::hessian(const Vector& x, const Vector& y) const {
  require_same_dim(x, y, "hitting cost");
  return alpha_ * lp_norm_hessian(x - y, p_);
}

Instance Instance::make(Vector x0, std::vector<Vector> contexts, double alpha, MemorySpec memory) {
  Instance inst;
  inst.initial.assign(static_cast<std::size_t>(memory.q()), x0);
  inst.contexts = std::move(contexts);
  inst.alpha = alpha;
  inst.memory = std::move(memory);
  inst.validate();
  return inst;
}

Instance Instance::scalar(double x0, const std::vector<double>& contexts, double alpha) {
  return make(Vector::Constant(1, x0), to_vectors(contexts), alpha, MemorySpec::single_step(1));
}

const Vector& Instance::context(int t) const {
  if (t < 1 || t > horizon()) {
    throw DomainError("step index " + std::to_string(t) + " outside 1.." + std::to_string(horizon()));
  }
  return contexts[static_cast<std::size_t>(t - 1)];
}

History Instance::initial_history() const {
  return History(initial.rbegin(), initial.rend());
}

void Instance::validate() const {
  if (contexts.empty()) throw DomainError("instance: horizon T must be >= 1");
  if (!(alpha > 0.0)) throw DomainError("instance: alpha must be > 0");
  if (static_cast<int>(initial.size()) != memory.q()) {
    throw DimensionError("instance: expected q = " + std::to_string(memory.q()) + " initial actions");
  }
  const auto d = memory.dim();
  for (const auto& x : initial) {
    if (x.size() != d) throw DimensionError("instance: initial action dimension mismatch");
    if (!x.allFinite()) throw DomainError("instance: non-finite initial action");
  }
  for (const auto& y : contexts) {
    if (y.size() != d) throw DimensionError("instance: context dimension must equal action dimension");
    if (!y.allFinite()) throw DomainError("instance: non-finite context");
  }
}

void CostLedger::append(Vector action, double hit, double mem) {
  hit_.push_back(hit);
  mem_.push_back(mem);
  cum_.push_back(cum_.back() + hit + mem);
  actions_.push_back(std::move(action));
}

double hitting_cost(const Vector& x, const Vector& y, double alpha, double p) {
  return NormHittingCost(alpha, p).value(x, y);
}

double memory_cost(const Vector& x, const History& history, const MemorySpec& spec) {
  if (x.size() != spec.dim()) throw DimensionError("memory cost: action dimension mismatch");
  return lp_norm(x - spec.predicted(history), spec.p());
}

StepCost step_cost(const Instance& inst, int t, const Vector& x, const History& history) {
  const Vector& y = inst.context(t);
  return {hitting_cost(x, y, inst.alpha, inst.p()), memory_cost(x, history, inst.memory)};
}

void push_history(History& history, const Vector& x) {
  if (history.empty()) return;
  for (std::size_t i = history.size() - 1; i > 0; --i) history[i] = std::move(history[i - 1]);
  history[0] = x;
}

Trajectory evaluate(const Instance& inst, const std::vector<Vector>& actions) {
  if (static_cast<int>(actions.size()) != inst.horizon()) {
    throw DimensionError("trajectory length " + std::to_string(actions.size()) +
                         " does not match horizon " + std::to_string(inst.horizon()));
  }
  Trajectory traj;
  History hist = inst.initial_history();
  for (int t = 1; t <= inst.horizon(); ++t) {
    const Vector& x = actions[static_cast<std::size_t>(t - 1)];
    const auto c = step_cost(inst, t, x, hist);
    traj.ledger.append(x, c.hit, c.mem);
    push_history(hist, x);
  }
  traj.actions = actions;
  return traj;
}

double total_cost(const Instance& inst, const Trajectory& traj) {
  return evaluate(inst, traj.actions).ledger.total();
}

std::vector<Vector> to_vectors(std::span<const double> values) {
  std::vector<Vector> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(Vector::Constant(1, v));
  return out;
}

std::vector<double> to_scalars(const std::vector<Vector>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v[0]);
  return out;
}

}  // namespace erl
