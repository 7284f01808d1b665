#include "erl/robustify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "erl/error.hpp"

namespace erl {

void RobustBudget::validate() const {
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw DomainError("robustification: lambda must be >= 1");
  if (!(slack_b >= 0.0) || !std::isfinite(slack_b)) throw DomainError("robustification: B must be >= 0");
}

namespace {

int reservation_terms(int q, int t, int horizon) { return std::max(0, std::min(q, horizon - t)); }

void check_windows(const History& history, const History& expert_window, const MemorySpec& spec) {
  if (static_cast<int>(history.size()) != spec.q()) throw DimensionError("robustification: history must hold q actions");
  if (static_cast<int>(expert_window.size()) != spec.q() + 1) {
    throw DimensionError("robustification: expert window must hold q + 1 actions");
  }
}

}  // namespace

double reservation_cost(const Vector& x, const History& history, const History& expert_window,
                        const MemorySpec& spec, int t, int horizon) {
  check_windows(history, expert_window, spec);
  const int q = spec.q();
  double g = 0.0;
  for (int k = 1; k <= reservation_terms(q, t, horizon); ++k) {
    Vector r = spec.coeff(k) * x;
    for (int i = 1; i <= q - k; ++i) r += spec.coeff(k + i) * history[i - 1];
    for (int i = 0; i <= q - k; ++i) r -= spec.coeff(k + i) * expert_window[i];
    g += lp_norm(r, spec.p());
  }
  return g;
}

RobustConstraint::RobustConstraint(const HittingCost& cost, const MemorySpec& spec, const StepContext& ctx,
                                   double budget, bool with_reservation)
    : cost_(&cost), p_(spec.p()), q_(spec.q()), cum_prev_(ctx.cum_prev), budget_(budget), y_(ctx.y) {
  check_windows(ctx.history, ctx.expert_window, spec);
  const int d = spec.dim();
  if (y_.size() != d) throw DimensionError("robustification: context dimension mismatch");

  NormTerm mem;
  mem.a = Matrix::Identity(d, d);
  mem.b = spec.predicted(ctx.history);
  for (int i = 1; i <= q_; ++i) mem.history_coeffs.emplace_back(i, -spec.coeff(i));
  terms_.push_back(std::move(mem));

  if (!with_reservation) return;
  for (int k = 1; k <= reservation_terms(q_, ctx.t, ctx.horizon); ++k) {
    NormTerm res;
    res.a = spec.coeff(k);
    res.b = Vector::Zero(d);
    for (int i = 0; i <= q_ - k; ++i) res.b += spec.coeff(k + i) * ctx.expert_window[i];
    for (int i = 1; i <= q_ - k; ++i) {
      res.b -= spec.coeff(k + i) * ctx.history[i - 1];
      res.history_coeffs.emplace_back(i, spec.coeff(k + i));
    }
    terms_.push_back(std::move(res));
  }
}

double RobustConstraint::lhs(const Vector& x) const {
  double v = cum_prev_ + cost_->value(x, y_);
  for (const auto& term : terms_) v += lp_norm(term.residual(x), p_);
  return v;
}

Vector RobustConstraint::gradient(const Vector& x) const {
  Vector g = cost_->subgradient(x, y_);
  for (const auto& term : terms_) g.noalias() += term.a.transpose() * lp_norm_subgradient(term.residual(x), p_);
  return g;
}

Matrix RobustConstraint::hessian(const Vector& x) const {
  Matrix h = cost_->hessian(x, y_);
  for (const auto& term : terms_) {
    h.noalias() += term.a.transpose() * lp_norm_hessian(term.residual(x), p_) * term.a;
  }
  return h;
}

Vector RobustConstraint::history_gradient(const Vector& x, int i) const {
  Vector g = Vector::Zero(dim());
  for (const auto& term : terms_) {
    for (const auto& [lag, b] : term.history_coeffs) {
      if (lag == i) g.noalias() += b.transpose() * lp_norm_subgradient(term.residual(x), p_);
    }
  }
  return g;
}

Matrix RobustConstraint::history_cross_hessian(const Vector& x, int i) const {
  Matrix h = Matrix::Zero(dim(), dim());
  for (const auto& term : terms_) {
    for (const auto& [lag, b] : term.history_coeffs) {
      if (lag == i) h.noalias() += term.a.transpose() * lp_norm_hessian(term.residual(x), p_) * b;
    }
  }
  return h;
}

std::optional<std::vector<kernels::AbsTerm>> RobustConstraint::scalar_terms() const {
  const auto w = cost_->norm_weight();
  if (dim() != 1 || !w) return std::nullopt;
  std::vector<kernels::AbsTerm> out;
  out.push_back({*w, 1.0, y_[0]});
  for (const auto& term : terms_) out.push_back({1.0, term.a(0, 0), term.b[0]});
  return out;
}

namespace {

// offset + sum_k w_k |s_k x - c_k| with its one-sided derivatives.
struct Piecewise {
  double offset = 0.0;
  std::vector<kernels::AbsTerm> terms;

  double value(double x) const {
    double v = offset;
    for (const auto& t : terms) v += t.weight * std::abs(t.slope * x - t.center);
    return v;
  }
  double right_derivative(double x) const {
    double s = 0.0;
    for (const auto& t : terms) {
      const double r = t.slope * x - t.center;
      s += t.weight * (r > 0 ? t.slope : r < 0 ? -t.slope : std::abs(t.slope));
    }
    return s;
  }
  double left_derivative(double x) const {
    double s = 0.0;
    for (const auto& t : terms) {
      const double r = t.slope * x - t.center;
      s += t.weight * (r > 0 ? t.slope : r < 0 ? -t.slope : -std::abs(t.slope));
    }
    return s;
  }
  double far_slope() const {
    double s = 0.0;
    for (const auto& t : terms) s += t.weight * std::abs(t.slope);
    return s;
  }
};

// Boundary of {g <= 0} on the side `dir` of a point where g < 0. g is linear
// between consecutive breakpoints, so the root is found exactly.
double walk_to_boundary(const Piecewise& g, double start, double g_start, int dir) {
  std::vector<double> bps;
  for (const auto& t : g.terms) {
    const double b = t.center / t.slope;
    if (dir > 0 ? b > start : b < start) bps.push_back(b);
  }
  if (dir > 0) {
    std::sort(bps.begin(), bps.end());
  } else {
    std::sort(bps.begin(), bps.end(), std::greater<>());
  }
  double cur = start, gcur = g_start;
  for (double b : bps) {
    const double gb = g.value(b);
    if (gb >= 0.0) {
      const double frac = -gcur / (gb - gcur);
      return cur + frac * (b - cur);
    }
    cur = b;
    gcur = gb;
  }
  const double slope = g.far_slope();
  if (slope <= 0.0) return dir * std::numeric_limits<double>::infinity();
  return cur + dir * (-gcur / slope);
}

double tolerance(const RobustConstraint& g, const ProjectOptions& opts) {
  return opts.tol * std::max(1.0, std::abs(g.budget()));
}

void require_feasible_expert(double g_expert, double tol) {
  if (g_expert > tol) {
    throw InvariantViolation("robustification: expert action violates the constraint (excess " +
                             std::to_string(g_expert) + ")");
  }
}

// g is convex and about zero at both e and the boundary point x, so g at their
// midpoint bounds the depth of the feasible set between them: its minimum there
// is at least twice the midpoint value. A set no deeper than the tolerance is
// rounding noise around e, and moving into it would compound across steps.
bool shallow(double g_mid, double tol) { return g_mid >= -tol; }

ProjectionResult project_scalar_piecewise(double xt, const Piecewise& g, double e, double tol) {
  ProjectionResult res;
  const double g_xt = g.value(xt);
  if (g_xt <= 0.0) {
    res.x = Vector::Constant(1, xt);
    res.constraint_value = g_xt;
    return res;
  }
  const double ge = g.value(e);
  require_feasible_expert(ge, tol);
  const double lo = walk_to_boundary(g, e, std::min(ge, 0.0), -1);
  const double hi = walk_to_boundary(g, e, std::min(ge, 0.0), +1);
  double x = std::clamp(xt, lo, hi);
  if (g.value(x) > tol || shallow(g.value(0.5 * (x + e)), tol)) x = e;
  res.x = Vector::Constant(1, x);
  res.active = true;
  res.constraint_value = g.value(x);
  if (xt != x) {
    const double s = xt > x ? g.right_derivative(x) : -g.left_derivative(x);
    res.mu = s > 0.0 ? std::abs(xt - x) / s : 0.0;
  }
  return res;
}

// Largest feasible point along [from, to] starting from feasible `from`.
double bisect_flank(const std::function<double(double)>& g, double from, double dir) {
  double step = std::max(1.0, std::abs(from));
  double far = from + dir * step;
  int grow = 0;
  while (g(far) <= 0.0) {
    if (++grow > 200) return dir * std::numeric_limits<double>::infinity();
    step *= 2.0;
    far = from + dir * step;
  }
  double in = from;
  for (int it = 0; it < 200 && in != far; ++it) {
    const double mid = 0.5 * (in + far);
    if (mid == in || mid == far) break;
    (g(mid) <= 0.0 ? in : far) = mid;
  }
  return in;
}

ProjectionResult project_scalar_generic(double xt, const RobustConstraint& gc, double e, double tol) {
  auto g = [&](double x) { return gc.value(Vector::Constant(1, x)); };
  ProjectionResult res;
  const double g_xt = g(xt);
  if (g_xt <= 0.0) {
    res.x = Vector::Constant(1, xt);
    res.constraint_value = g_xt;
    return res;
  }
  const double ge = g(e);
  require_feasible_expert(ge, tol);
  double x = xt > e ? bisect_flank(g, e, +1.0) : bisect_flank(g, e, -1.0);
  if (shallow(g(0.5 * (x + e)), tol)) x = e;
  res.x = Vector::Constant(1, x);
  res.active = true;
  res.constraint_value = g(x);
  const double s = gc.gradient(res.x)[0];
  if (s != 0.0 && (xt - x) / s > 0.0) res.mu = (xt - x) / s;
  return res;
}

// argmin_x 0.5 ||x - xt||^2 + mu g(x).
Vector solve_penalized(const Vector& xt, const RobustConstraint& g, double mu, const ProjectOptions& opts) {
  auto phi = [&](const Vector& x) { return 0.5 * (x - xt).squaredNorm() + mu * g.value(x); };
  Vector x = xt;
  Vector best = xt;
  double best_val = phi(xt);
  for (int k = 0; k < opts.inner_iters; ++k) {
    const double eta = 1.0 / (k + 1.0);
    x = (1.0 - eta) * x + eta * (xt - mu * g.gradient(x));
    const double v = phi(x);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
  }
  if (!opts.newton_polish) return best;
  const int d = static_cast<int>(xt.size());
  x = best;
  for (int it = 0; it < 50; ++it) {
    const Vector grad = x - xt + mu * g.gradient(x);
    if (grad.norm() <= 1e-15 * (1.0 + x.norm())) break;
    const Matrix h = Matrix::Identity(d, d) + mu * g.hessian(x);
    const Vector dx = h.ldlt().solve(grad);
    double step = 1.0;
    bool moved = false;
    const double gnorm = grad.norm();
    for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
      const Vector cand = x - step * dx;
      const double v = phi(cand);
      // Near the optimum phi stops resolving changes in x (it is flat to
      // second order), so a step that keeps phi level but shrinks the
      // stationarity residual is also taken.
      const bool level = v <= best_val + 1e-14 * (1.0 + std::abs(best_val));
      if (v < best_val || (level && (cand - xt + mu * g.gradient(cand)).norm() < gnorm)) {
        best_val = std::min(best_val, v);
        x = cand;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return x;
}

ProjectionResult project_vector(const Vector& xt, const RobustConstraint& g, const Vector& e,
                                const ProjectOptions& opts, double tol) {
  ProjectionResult res;
  const double g_xt = g.value(xt);
  if (g_xt <= 0.0) {
    res.x = xt;
    res.constraint_value = g_xt;
    return res;
  }
  const double ge = g.value(e);
  require_feasible_expert(ge, tol);
  res.active = true;

  double mu_lo = 0.0, mu_hi = 1.0;
  Vector x_hi = solve_penalized(xt, g, mu_hi, opts);
  for (int grow = 0; g.value(x_hi) > 0.0 && grow < 200; ++grow) {
    mu_lo = mu_hi;
    mu_hi *= 2.0;
    x_hi = solve_penalized(xt, g, mu_hi, opts);
  }
  for (int it = 0; it < opts.dual_bisect_iters; ++it) {
    const double mid = 0.5 * (mu_lo + mu_hi);
    const Vector xm = solve_penalized(xt, g, mid, opts);
    if (g.value(xm) > 0.0) {
      mu_lo = mid;
    } else {
      mu_hi = mid;
      x_hi = xm;
    }
  }
  Vector x = x_hi;
  if (g.value(x) > tol) {
    // Pull back toward the expert action, which is feasible.
    double in = 0.0, out = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (in + out);
      (g.value(e + mid * (x - e)) <= 0.0 ? in : out) = mid;
    }
    x = e + in * (x - e);
  }
  if (shallow(g.value(0.5 * (x + e)), tol)) {
    const Vector grad = g.gradient(e);
    x = e;
    mu_hi = std::max(0.0, (xt - e).dot(grad) / std::max(grad.squaredNorm(), 1e-300));
  }
  res.x = x;
  res.mu = mu_hi;
  res.constraint_value = g.value(x);
  return res;
}

}  // namespace

ProjectionResult project(const Vector& x_tilde, const RobustConstraint& g, const Vector& expert_action,
                         const ProjectOptions& opts) {
  if (x_tilde.size() != g.dim() || expert_action.size() != g.dim()) {
    throw DimensionError("project: action dimension mismatch");
  }
  if (!x_tilde.allFinite()) throw DomainError("project: non-finite proposal");
  const double tol = tolerance(g, opts);
  if (g.dim() == 1) {
    if (auto terms = g.scalar_terms()) {
      Piecewise pw;
      pw.offset = g.offset();
      for (const auto& t : *terms) {
        if (t.weight == 0.0) continue;
        if (t.slope == 0.0) {
          pw.offset += t.weight * std::abs(t.center);
        } else {
          pw.terms.push_back(t);
        }
      }
      auto res = project_scalar_piecewise(x_tilde[0], pw, expert_action[0], tol);
      res.constraint_value = g.value(res.x);
      return res;
    }
    return project_scalar_generic(x_tilde[0], g, expert_action[0], tol);
  }
  return project_vector(x_tilde, g, expert_action, opts, tol);
}

ProjectionResult project(const Vector& x_tilde, const RobustBudget& budget, const StepContext& ctx,
                         const MemorySpec& spec, double alpha, const ProjectOptions& opts) {
  budget.validate();
  const NormHittingCost cost(alpha, spec.p());
  const RobustConstraint g(cost, spec, ctx, budget.value());
  return project(x_tilde, g, ctx.expert_window.at(0), opts);
}

ErlState::ErlState(const Instance& inst, const Expert& expert, double lambda, double slack_b, ProjectOptions opts)
    : inst_(&inst),
      lambda_(lambda),
      slack_b_(slack_b),
      opts_(opts),
      expert_(inst, expert),
      history_(inst.initial_history()) {
  RobustBudget{lambda, slack_b, 0.0}.validate();
  inst.validate();
}

ErlStepResult erl_step(ErlState& s, const Vector& x_tilde) {
  const Instance& inst = *s.inst_;
  const int t = s.steps() + 1;
  if (t > inst.horizon()) throw DomainError("erl_step: episode already finished");
  if (x_tilde.size() != inst.dim()) throw DimensionError("erl_step: proposal dimension mismatch");

  const Vector expert_action = s.expert_.step();
  ErlStepResult out;
  out.x_tilde = x_tilde;
  out.context.t = t;
  out.context.horizon = inst.horizon();
  out.context.cum_prev = s.ledger_.cum(static_cast<std::size_t>(t - 1));
  out.context.y = inst.context(t);
  out.context.history = s.history_;
  out.context.expert_window = s.expert_.window();
  out.budget = {s.lambda_, s.slack_b_, s.expert_.ledger().cum(static_cast<std::size_t>(t))};

  const auto cost = inst.hitting();
  const RobustConstraint g(cost, inst.memory, out.context, out.budget.value());
  out.projection = project(x_tilde, g, expert_action, s.opts_);
  if (out.projection.constraint_value > tolerance(g, s.opts_)) {
    throw InvariantViolation("erl_step: projected action exceeds the robustness budget at t = " +
                             std::to_string(t));
  }
  const auto c = step_cost(inst, t, out.projection.x, s.history_);
  s.ledger_.append(out.projection.x, c.hit, c.mem);
  push_history(s.history_, out.projection.x);
  return out;
}

ErlRun run_erl(const Instance& inst, const Expert& expert, double lambda, double slack_b,
               const Proposer& proposer, const ProjectOptions& opts) {
  ErlState state(inst, expert, lambda, slack_b, opts);
  ErlRun run;
  run.steps.reserve(static_cast<std::size_t>(inst.horizon()));
  for (int t = 1; t <= inst.horizon(); ++t) run.steps.push_back(erl_step(state, proposer(state, t)));
  run.trajectory.actions = state.ledger().actions();
  run.trajectory.ledger = state.ledger();
  run.expert.actions = state.expert().ledger().actions();
  run.expert.ledger = state.expert().ledger();
  return run;
}

}  // namespace erl
