#pragma once

// Expert online algorithms (Robust, Greedy), the offline optimum, and
// competitive-ratio auditing.

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "erl/core.hpp"
#include "erl/error.hpp"

namespace erl {

// Raised by iterative experts that exhaust their budget; carries the best
// point found so callers can still use it.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Vector best) : Error(what), best_(std::move(best)) {}
  const Vector& best() const { return best_; }

 private:
  Vector best_;
};

// argmin_x f(x, y_t). Throws UnsupportedError if the model has no unique minimizer.
Vector robust_action(const Vector& y, const HittingCost& cost);

struct GreedyOptions {
  double tol = 1e-12;           // relative bracket width (d = 1) / stall threshold (d > 1)
  int max_golden_iters = 200;
  int max_subgrad_iters = 20000;
  int stall_window = 200;
};

// argmin_x f(x, y) + d(x, history). Golden-section search for d = 1,
// diminishing-step subgradient descent for d > 1. Ties prefer the no-move
// point sum_i C_i x_{t-i}, then y.
Vector greedy_action(const Vector& y, const History& history, const MemorySpec& spec,
                     const HittingCost& cost, const GreedyOptions& opts = {});
Vector greedy_action(const Vector& y, const History& history, const MemorySpec& spec, double alpha);

class Expert {
 public:
  virtual ~Expert() = default;
  virtual std::string name() const = 0;
  // Action at step t given the expert's own newest-first history (size q).
  virtual Vector act(const Instance& inst, int t, const History& own_history) const = 0;
};

class RobustExpert final : public Expert {
 public:
  std::string name() const override { return "Robust"; }
  Vector act(const Instance& inst, int t, const History& own_history) const override;
};

class GreedyExpert final : public Expert {
 public:
  explicit GreedyExpert(GreedyOptions opts = {}) : opts_(opts) {}
  std::string name() const override { return "Greedy"; }
  Vector act(const Instance& inst, int t, const History& own_history) const override;

 private:
  GreedyOptions opts_;
};

// The expert running its algorithm alone, advanced one step at a time so
// that it can be interleaved with an online consumer.
class ExpertRunner {
 public:
  ExpertRunner(const Instance& inst, const Expert& expert);

  // Computes x^pi_t for the next t and appends its cost.
  const Vector& step();
  int steps() const { return static_cast<int>(ledger_.steps()); }
  const CostLedger& ledger() const { return ledger_; }
  // Newest-first x^pi_t, x^pi_{t-1}, ..., x^pi_{t-q} (size q+1) after step t.
  const History& window() const { return window_; }

 private:
  const Instance* inst_;
  const Expert* expert_;
  History window_;
  CostLedger ledger_;
};

struct ExpertTrace {
  std::vector<Vector> actions;
  CostLedger ledger;
};

ExpertTrace run_expert(const Instance& inst, const Expert& expert);

struct CrReport {
  double cost_alg = 0.0;
  double cost_ref = 0.0;
  double ratio = 0.0;
  double slack_b = 0.0;
  double bound = 1.0;
  bool satisfied = false;
};

// Absolute audit tolerance at unit cost scale; scaled by max(1, bound*ref + B).
inline constexpr double kAuditTol = 1e-9;

// Checks cost_alg <= bound * cost_ref + B.
CrReport audit_cr(double cost_alg, double cost_ref, double bound, double slack_b);

// max((beta + 1) / alpha, 1).
double robust_cr_bound(double alpha, const MemorySpec& spec);

std::string cr_csv_header();
std::string cr_csv_row(const std::string& instance_id, const std::string& algorithm, const CrReport& r);

// Offline optimum over a scalar action grid.
struct GridSpec {
  int n = 2001;
  double margin_frac = 0.10;
  // Also place x_{-q+1..0} and every y_t on the grid. For q = 1 this makes the
  // DP exact: some optimal solution only takes those values.
  bool include_breakpoints = true;
  std::size_t state_budget = 4'000'000;  // max grid states n^q
};

// Grid spacing the DP would use for this instance (uniform part of the grid).
double dp_grid_spacing(const Instance& inst, const GridSpec& grid = {});

// Exact minimizer of the total cost over the grid (d = 1 only), by dynamic
// programming on the last q grid indices.
Trajectory offline_opt_dp(const Instance& inst, const GridSpec& grid = {});

struct SubgradOptions {
  int max_iters = 40000;
  double step_scale = 0.0;  // c in c/sqrt(k); 0 picks a scale from the contexts
  int restart_window = 2000;  // restart from the best iterate with c/2 when stalled
};

// Subgradient descent on the joint variable (x_1..x_T), warm-started from
// Robust; returns the best iterate. Works for any d.
Trajectory offline_opt_subgrad(const Instance& inst, const SubgradOptions& opts = {});

}  // namespace erl
