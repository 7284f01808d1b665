#pragma once

// Expert robustification: each ML action is projected onto the set of actions
// whose cumulative cost, plus a reservation cost that keeps a return to the
// expert's path affordable, stays within lambda * (expert cost) + B.

#include <functional>
#include <optional>
#include <vector>

#include "erl/core.hpp"
#include "erl/experts.hpp"
#include "erl/kernels.hpp"

namespace erl {

struct RobustBudget {
  double lambda = 1.0;
  double slack_b = 0.0;
  double expert_cum = 0.0;  // cost(x^pi_{1:t})

  double value() const { return lambda * expert_cum + slack_b; }
  void validate() const;
};

struct ProjectionResult {
  Vector x;
  double mu = 0.0;
  bool active = false;
  double constraint_value = 0.0;  // LHS - RHS at x
};

// Everything the step-t constraint depends on besides the candidate action.
struct StepContext {
  int t = 1;
  int horizon = 1;
  double cum_prev = 0.0;  // cost(x_{1:t-1}) of the robustified trajectory
  Vector y;
  History history;        // x_{t-1}, ..., x_{t-q}
  History expert_window;  // x^pi_t, x^pi_{t-1}, ..., x^pi_{t-q}
};

// ||A x - b||_p, where b depends affinely on the history: d r / d x_{t-i} = B_i.
struct NormTerm {
  Matrix a;
  Vector b;
  std::vector<std::pair<int, Matrix>> history_coeffs;  // (i, B_i), i = 1..q

  Vector residual(const Vector& x) const { return a * x - b; }
};

// Reservation cost
//   G = sum_{k=1}^{min(q, T-t)} || C_k x + sum_{i=1}^{q-k} C_{k+i} x_{t-i} - sum_{i=0}^{q-k} C_{k+i} x^pi_{t-i} ||
// evaluated term by term. For q = 1, C_1 = I and t < T this is ||x - x^pi_t||.
double reservation_cost(const Vector& x, const History& history, const History& expert_window,
                        const MemorySpec& spec, int t, int horizon);

// Convex constraint g(x) = cost(x_{1:t-1}) + f(x, y_t) + d(x, x_{t-q:t-1}) + G(x, ...) - budget.
class RobustConstraint {
 public:
  // with_reservation = false drops G; only used to demonstrate why G is needed.
  RobustConstraint(const HittingCost& cost, const MemorySpec& spec, const StepContext& ctx, double budget,
                   bool with_reservation = true);

  double lhs(const Vector& x) const;
  double value(const Vector& x) const { return lhs(x) - budget_; }
  double budget() const { return budget_; }
  // Subgradient (zero subgradient at norm kinks) and Hessian of g in x.
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;
  // d g / d x_{t-i} and d (grad_x g) / d x_{t-i}, i = 1..q.
  Vector history_gradient(const Vector& x, int i) const;
  Matrix history_cross_hessian(const Vector& x, int i) const;

  // g as offset + sum_k w_k |s_k x - c_k| when d = 1 and the hitting cost is a
  // weighted norm; nullopt otherwise.
  std::optional<std::vector<kernels::AbsTerm>> scalar_terms() const;
  double offset() const { return cum_prev_ - budget_; }

  int dim() const { return static_cast<int>(y_.size()); }
  int q() const { return q_; }
  const std::vector<NormTerm>& terms() const { return terms_; }
  const HittingCost& hitting() const { return *cost_; }
  const Vector& y() const { return y_; }

 private:
  const HittingCost* cost_;
  double p_;
  int q_;
  double cum_prev_;
  double budget_;
  Vector y_;
  std::vector<NormTerm> terms_;  // memory term first, then reservation terms k = 1..
};

struct ProjectOptions {
  double tol = 1e-9;  // budget tolerance, scaled by max(1, |budget|)
  int dual_bisect_iters = 60;
  int inner_iters = 500;
  bool newton_polish = true;
};

// Euclidean projection of x_tilde onto {x : g(x) <= 0}. The expert action
// must be feasible (within tolerance); otherwise InvariantViolation.
ProjectionResult project(const Vector& x_tilde, const RobustConstraint& g, const Vector& expert_action,
                         const ProjectOptions& opts = {});

// Convenience overload assembling the constraint for the built-in hitting cost.
ProjectionResult project(const Vector& x_tilde, const RobustBudget& budget, const StepContext& ctx,
                         const MemorySpec& spec, double alpha, const ProjectOptions& opts = {});

struct ErlStepResult;

// State of one ERL episode; the expert advances alongside it.
class ErlState {
 public:
  ErlState(const Instance& inst, const Expert& expert, double lambda, double slack_b,
           ProjectOptions opts = {});

  const Instance& instance() const { return *inst_; }
  int steps() const { return static_cast<int>(ledger_.steps()); }
  // x_{t}, ..., x_{t-q+1} after t steps (initial actions before any step).
  const History& history() const { return history_; }
  const CostLedger& ledger() const { return ledger_; }
  const ExpertRunner& expert() const { return expert_; }
  double lambda() const { return lambda_; }
  double slack_b() const { return slack_b_; }
  const ProjectOptions& options() const { return opts_; }

 private:
  friend ErlStepResult erl_step(ErlState& state, const Vector& x_tilde);

  const Instance* inst_;
  double lambda_;
  double slack_b_;
  ProjectOptions opts_;
  ExpertRunner expert_;
  History history_;
  CostLedger ledger_;
};

struct ErlStepResult {
  Vector x_tilde;
  ProjectionResult projection;
  StepContext context;
  RobustBudget budget;
};

// One round: expert acts, ML proposal is projected, cost is booked.
ErlStepResult erl_step(ErlState& state, const Vector& x_tilde);

// Proposal for step t given the robustified history x_{t-1..t-q}.
using Proposer = std::function<Vector(const ErlState& state, int t)>;

struct ErlRun {
  Trajectory trajectory;
  ExpertTrace expert;
  std::vector<ErlStepResult> steps;
};

ErlRun run_erl(const Instance& inst, const Expert& expert, double lambda, double slack_b,
               const Proposer& proposer, const ProjectOptions& opts = {});

}  // namespace erl
