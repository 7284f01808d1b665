#include "erl/experts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace erl {

Vector robust_action(const Vector& y, const HittingCost& cost) {
  auto x = cost.minimizer(y);
  if (!x) throw UnsupportedError("Robust requires a hitting cost with a unique minimizer");
  return *x;
}

namespace {

struct GreedyObjective {
  const Vector& y;
  const Vector& anchor;  // sum_i C_i x_{t-i}
  const HittingCost& cost;
  double p;

  double operator()(const Vector& x) const { return cost.value(x, y) + lp_norm(x - anchor, p); }
  Vector subgradient(const Vector& x) const {
    return cost.subgradient(x, y) + lp_norm_subgradient(x - anchor, p);
  }
};

// Lowest objective wins; earlier candidates win ties.
Vector pick_best(const GreedyObjective& obj, const std::vector<Vector>& candidates) {
  std::size_t best = 0;
  double best_val = obj(candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double v = obj(candidates[i]);
    const double tie = 1e-12 * (1.0 + std::abs(best_val));
    if (v < best_val - tie) {
      best = i;
      best_val = v;
    }
  }
  return candidates[best];
}

Vector golden_section(const GreedyObjective& obj, double lo, double hi, const GreedyOptions& opts) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval = [&](double x) { return obj(Vector::Constant(1, x)); };
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c), fd = eval(d);
  for (int it = 0; it < opts.max_golden_iters; ++it) {
    if (b - a <= opts.tol * (1.0 + std::abs(a) + std::abs(b))) {
      return Vector::Constant(1, fc <= fd ? c : d);
    }
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  throw ConvergenceError("greedy: golden-section search did not converge",
                         Vector::Constant(1, fc <= fd ? c : d));
}

Vector subgradient_descent(const GreedyObjective& obj, const Vector& start, double scale,
                           const GreedyOptions& opts) {
  Vector x = start;
  Vector best = start;
  double best_val = obj(start);
  double window_start_val = best_val;
  for (int k = 0; k < opts.max_subgrad_iters; ++k) {
    const Vector g = obj.subgradient(x);
    const double gn = g.norm();
    if (gn == 0.0) return x;
    x -= (scale / std::sqrt(k + 1.0)) * (g / gn);
    const double v = obj(x);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
    if ((k + 1) % opts.stall_window == 0) {
      if (window_start_val - best_val <= opts.tol * (1.0 + std::abs(best_val))) return best;
      window_start_val = best_val;
    }
  }
  throw ConvergenceError("greedy: subgradient descent did not stall within the iteration budget", best);
}

}  // namespace

Vector greedy_action(const Vector& y, const History& history, const MemorySpec& spec,
                     const HittingCost& cost, const GreedyOptions& opts) {
  const Vector anchor = spec.predicted(history);
  if (y.size() != anchor.size()) throw DimensionError("greedy: context/action dimension mismatch");
  const GreedyObjective obj{y, anchor, cost, spec.p()};
  if ((y - anchor).cwiseAbs().maxCoeff() == 0.0) return anchor;

  Vector searched;
  if (y.size() == 1) {
    // Both terms are monotone outside the hull of {y, anchor}.
    searched = golden_section(obj, std::min(y[0], anchor[0]), std::max(y[0], anchor[0]), opts);
  } else {
    const Vector start = pick_best(obj, {anchor, y});
    searched = subgradient_descent(obj, start, 0.5 * (y - anchor).norm(), opts);
  }
  return pick_best(obj, {anchor, y, searched});
}

Vector greedy_action(const Vector& y, const History& history, const MemorySpec& spec, double alpha) {
  return greedy_action(y, history, spec, NormHittingCost(alpha, spec.p()));
}

Vector RobustExpert::act(const Instance& inst, int t, const History&) const {
  return robust_action(inst.context(t), inst.hitting());
}

Vector GreedyExpert::act(const Instance& inst, int t, const History& own_history) const {
  return greedy_action(inst.context(t), own_history, inst.memory, inst.hitting(), opts_);
}

ExpertRunner::ExpertRunner(const Instance& inst, const Expert& expert) : inst_(&inst), expert_(&expert) {
  // q initial actions plus a pad slot that the first push drops, so that
  // after step t the window holds x^pi_t .. x^pi_{t-q}.
  window_ = inst.initial_history();
  window_.push_back(inst.initial.front());
}

const Vector& ExpertRunner::step() {
  const int t = steps() + 1;
  const int q = inst_->memory.q();
  History own(window_.begin(), window_.begin() + q);
  Vector x = expert_->act(*inst_, t, own);
  const auto c = step_cost(*inst_, t, x, own);
  ledger_.append(x, c.hit, c.mem);
  push_history(window_, x);
  return ledger_.actions().back();
}

ExpertTrace run_expert(const Instance& inst, const Expert& expert) {
  ExpertRunner runner(inst, expert);
  for (int t = 1; t <= inst.horizon(); ++t) runner.step();
  return {runner.ledger().actions(), runner.ledger()};
}

CrReport audit_cr(double cost_alg, double cost_ref, double bound, double slack_b) {
  CrReport r;
  r.cost_alg = cost_alg;
  r.cost_ref = cost_ref;
  r.slack_b = slack_b;
  r.bound = bound;
  if (cost_ref > 0.0) {
    r.ratio = cost_alg / cost_ref;
  } else {
    r.ratio = cost_alg > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  const double rhs = bound * cost_ref + slack_b;
  r.satisfied = cost_alg <= rhs + kAuditTol * std::max(1.0, std::abs(rhs));
  return r;
}

double robust_cr_bound(double alpha, const MemorySpec& spec) {
  if (!(alpha > 0.0)) throw DomainError("robust_cr_bound: alpha must be > 0");
  return std::max((spec.beta() + 1.0) / alpha, 1.0);
}

std::string cr_csv_header() { return "instance_id,algorithm,cost,opt_cost,ratio,bound,satisfied"; }

std::string cr_csv_row(const std::string& instance_id, const std::string& algorithm, const CrReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d", r.cost_alg, r.cost_ref, r.ratio, r.bound,
                r.satisfied ? 1 : 0);
  return instance_id + "," + algorithm + "," + buf;
}

}  // namespace erl
