// Offline optimum of the total cost: grid dynamic programming for scalar
// actions and joint subgradient descent for any dimension.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "erl/experts.hpp"
#include "erl/kernels.hpp"

namespace erl {

namespace {

struct Grid {
  std::vector<double> points;  // sorted, unique
  double spacing = 0.0;        // spacing of the uniform part
};

Grid build_grid(const Instance& inst, const GridSpec& spec) {
  if (spec.n < 2) throw DomainError("DP grid needs at least 2 points");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& y : inst.contexts) {
    lo = std::min(lo, y[0]);
    hi = std::max(hi, y[0]);
  }
  for (const auto& x : inst.initial) {
    lo = std::min(lo, x[0]);
    hi = std::max(hi, x[0]);
  }
  const double range = hi - lo;
  const double margin = range > 0.0 ? spec.margin_frac * range : 1.0;
  lo -= margin;
  hi += margin;

  Grid g;
  g.spacing = (hi - lo) / (spec.n - 1);
  g.points.reserve(static_cast<std::size_t>(spec.n) + inst.contexts.size() + inst.initial.size());
  for (int i = 0; i < spec.n; ++i) g.points.push_back(lo + g.spacing * i);
  g.points.back() = hi;
  if (spec.include_breakpoints) {
    for (const auto& y : inst.contexts) g.points.push_back(y[0]);
    for (const auto& x : inst.initial) g.points.push_back(x[0]);
  }
  std::sort(g.points.begin(), g.points.end());
  g.points.erase(std::unique(g.points.begin(), g.points.end()), g.points.end());
  return g;
}

// Lower envelope E(s) = min_j W[j] + kappa |s - g[j]| of cones on a sorted grid.
class ConeEnvelope {
 public:
  void build(const double* w, const std::vector<double>& g, double kappa) {
    const std::size_t n = g.size();
    g_ = &g;
    kappa_ = kappa;
    left_.resize(n);
    right_.resize(n);
    left_arg_.resize(n);
    right_arg_.resize(n);
    left_[0] = w[0];
    left_arg_[0] = 0;
    for (std::size_t j = 1; j < n; ++j) {
      const double carried = left_[j - 1] + kappa * (g[j] - g[j - 1]);
      if (w[j] <= carried) {
        left_[j] = w[j];
        left_arg_[j] = static_cast<std::int32_t>(j);
      } else {
        left_[j] = carried;
        left_arg_[j] = left_arg_[j - 1];
      }
    }
    right_[n - 1] = w[n - 1];
    right_arg_[n - 1] = static_cast<std::int32_t>(n - 1);
    for (std::size_t j = n - 1; j-- > 0;) {
      const double carried = right_[j + 1] + kappa * (g[j + 1] - g[j]);
      if (w[j] <= carried) {
        right_[j] = w[j];
        right_arg_[j] = static_cast<std::int32_t>(j);
      } else {
        right_[j] = carried;
        right_arg_[j] = right_arg_[j + 1];
      }
    }
  }

  std::pair<double, std::int32_t> query(double s) const {
    const auto& g = *g_;
    const std::size_t n = g.size();
    if (s < g.front()) return {right_[0] + kappa_ * (g.front() - s), right_arg_[0]};
    if (s >= g.back()) return {left_[n - 1] + kappa_ * (s - g.back()), left_arg_[n - 1]};
    const auto j = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), s) - g.begin()) - 1;
    const double from_left = left_[j] + kappa_ * (s - g[j]);
    const double from_right = right_[j + 1] + kappa_ * (g[j + 1] - s);
    return from_left <= from_right ? std::pair{from_left, left_arg_[j]}
                                   : std::pair{from_right, right_arg_[j + 1]};
  }

  const std::vector<double>& left() const { return left_; }
  const std::vector<double>& right() const { return right_; }
  const std::vector<std::int32_t>& left_arg() const { return left_arg_; }
  const std::vector<std::int32_t>& right_arg() const { return right_arg_; }

 private:
  const std::vector<double>* g_ = nullptr;
  double kappa_ = 1.0;
  std::vector<double> left_, right_;
  std::vector<std::int32_t> left_arg_, right_arg_;
};

}  // namespace

double dp_grid_spacing(const Instance& inst, const GridSpec& grid) {
  if (inst.dim() != 1) throw UnsupportedError("grid DP supports scalar actions only");
  return build_grid(inst, grid).spacing;
}

Trajectory offline_opt_dp(const Instance& inst, const GridSpec& spec) {
  inst.validate();
  if (inst.dim() != 1) throw UnsupportedError("grid DP supports scalar actions only (d = 1)");
  const Grid grid = build_grid(inst, spec);
  const auto& g = grid.points;
  const std::size_t n = g.size();
  const int q = inst.memory.q();
  const int T = inst.horizon();

  {
    double states = 1.0;
    for (int i = 0; i < q; ++i) states *= static_cast<double>(n);
    if (states > static_cast<double>(spec.state_budget)) {
      throw UnsupportedError("grid DP state budget exceeded: " + std::to_string(n) + "^" + std::to_string(q) +
                             " states");
    }
  }

  std::vector<double> c(static_cast<std::size_t>(q) + 1, 0.0);
  for (int i = 1; i <= q; ++i) c[static_cast<std::size_t>(i)] = inst.memory.coeff(i)(0, 0);

  // Number of choices for the action at time tau (1 if it is a fixed initial action).
  auto size_at = [&](int tau) -> std::size_t { return tau >= 1 ? n : 1; };
  auto value_at = [&](int tau, std::size_t idx) -> double {
    return tau >= 1 ? g[idx] : inst.initial[static_cast<std::size_t>(tau + q - 1)][0];
  };

  // State at step t: (x_t, x_{t-1}, ..., x_{t-q+1}); oldest lag varies fastest.
  std::vector<double> prev{0.0};
  std::vector<std::vector<std::int32_t>> choice(static_cast<std::size_t>(T) + 1);
  std::vector<std::size_t> prefix_count(static_cast<std::size_t>(T) + 1);
  std::vector<std::size_t> row_len(static_cast<std::size_t>(T) + 1);

  const double alpha = inst.alpha;
  std::vector<double> hit(n);
  ConeEnvelope env;
  std::vector<double> row_out(n);
  std::vector<std::int32_t> row_arg(n);

  for (int t = 1; t <= T; ++t) {
    const std::size_t L = size_at(t - q);
    std::size_t P = 1;
    for (int lag = 1; lag <= q - 1; ++lag) P *= size_at(t - lag);
    prefix_count[static_cast<std::size_t>(t)] = P;
    row_len[static_cast<std::size_t>(t)] = L;

    const kernels::AbsTerm term{alpha, 1.0, inst.context(t)[0]};
    kernels::weighted_abs_sum({&term, 1}, 0.0, g, hit);

    std::vector<double> cur(n * P);
    auto& ch = choice[static_cast<std::size_t>(t)];
    ch.assign(n * P, 0);
    const double cq = c[static_cast<std::size_t>(q)];

    for (std::size_t pfx = 0; pfx < P; ++pfx) {
      // Decode (x_{t-1}, ..., x_{t-q+1}); lag q-1 is the fastest digit.
      double partial = 0.0;
      {
        std::size_t rem = pfx;
        for (int lag = q - 1; lag >= 1; --lag) {
          const std::size_t sz = size_at(t - lag);
          partial += c[static_cast<std::size_t>(lag)] * value_at(t - lag, rem % sz);
          rem /= sz;
        }
      }
      const double* w = prev.data() + pfx * L;

      if (L == 1) {
        const double v = value_at(t - q, 0);
        for (std::size_t i = 0; i < n; ++i) {
          cur[i * P + pfx] = hit[i] + w[0] + std::abs(g[i] - partial - cq * v);
          ch[i * P + pfx] = 0;
        }
        continue;
      }
      if (cq == 0.0) {
        const auto it = std::min_element(w, w + L);
        const auto arg = static_cast<std::int32_t>(it - w);
        for (std::size_t i = 0; i < n; ++i) {
          cur[i * P + pfx] = hit[i] + *it + std::abs(g[i] - partial);
          ch[i * P + pfx] = arg;
        }
        continue;
      }
      env.build(w, g, std::abs(cq));
      if (q == 1 && cq == 1.0) {
        // Queries land on grid points: E(g[i]) = min(left[i], right[i]).
        kernels::add_min_select(hit, env.left(), env.left_arg(), env.right(), env.right_arg(), row_out,
                                row_arg);
        for (std::size_t i = 0; i < n; ++i) {
          cur[i] = row_out[i];
          ch[i] = row_arg[i];
        }
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const auto [e, arg] = env.query((g[i] - partial) / cq);
        cur[i * P + pfx] = hit[i] + e;
        ch[i * P + pfx] = arg;
      }
    }
    prev = std::move(cur);
  }

  std::size_t state = static_cast<std::size_t>(std::min_element(prev.begin(), prev.end()) - prev.begin());
  std::vector<Vector> actions(static_cast<std::size_t>(T));
  for (int t = T; t >= 1; --t) {
    const std::size_t P = prefix_count[static_cast<std::size_t>(t)];
    const std::size_t L = row_len[static_cast<std::size_t>(t)];
    actions[static_cast<std::size_t>(t - 1)] = Vector::Constant(1, g[state / P]);
    const auto cidx = static_cast<std::size_t>(choice[static_cast<std::size_t>(t)][state]);
    state = (state % P) * L + cidx;
  }
  return evaluate(inst, actions);
}

Trajectory offline_opt_subgrad(const Instance& inst, const SubgradOptions& opts) {
  inst.validate();
  const int T = inst.horizon();
  const int q = inst.memory.q();
  const auto d = inst.dim();
  const double p = inst.p();
  const NormHittingCost cost = inst.hitting();

  std::vector<Vector> x;
  x.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) x.push_back(robust_action(inst.context(t), cost));

  auto action = [&](const std::vector<Vector>& xs, int tau) -> const Vector& {
    return tau >= 1 ? xs[static_cast<std::size_t>(tau - 1)]
                    : inst.initial[static_cast<std::size_t>(tau + q - 1)];
  };
  auto residual = [&](const std::vector<Vector>& xs, int t) {
    Vector r = action(xs, t);
    for (int i = 1; i <= q; ++i) r.noalias() -= inst.memory.coeff(i) * action(xs, t - i);
    return r;
  };
  auto objective = [&](const std::vector<Vector>& xs) {
    double total = 0.0;
    for (int t = 1; t <= T; ++t) {
      total += cost.value(xs[static_cast<std::size_t>(t - 1)], inst.context(t));
      total += lp_norm(residual(xs, t), p);
    }
    return total;
  };

  double scale = opts.step_scale;
  if (scale <= 0.0) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& y : inst.contexts) {
      lo = std::min(lo, y.minCoeff());
      hi = std::max(hi, y.maxCoeff());
    }
    for (const auto& v : inst.initial) {
      lo = std::min(lo, v.minCoeff());
      hi = std::max(hi, v.maxCoeff());
    }
    scale = 0.25 * std::max(hi - lo, 1e-12) * std::sqrt(static_cast<double>(T));
  }

  std::vector<Vector> best = x;
  double best_val = objective(x);
  std::vector<Vector> grad(static_cast<std::size_t>(T), Vector::Zero(d));
  int since_improvement = 0;
  int k = 0;
  for (int it = 0; it < opts.max_iters; ++it) {
    for (auto& gv : grad) gv.setZero();
    for (int t = 1; t <= T; ++t) {
      grad[static_cast<std::size_t>(t - 1)] += cost.subgradient(x[static_cast<std::size_t>(t - 1)], inst.context(t));
      const Vector gm = lp_norm_subgradient(residual(x, t), p);
      grad[static_cast<std::size_t>(t - 1)] += gm;
      for (int i = 1; i <= q && t - i >= 1; ++i) {
        grad[static_cast<std::size_t>(t - i - 1)].noalias() -= inst.memory.coeff(i).transpose() * gm;
      }
    }
    double gn2 = 0.0;
    for (const auto& gv : grad) gn2 += gv.squaredNorm();
    if (gn2 == 0.0) break;
    ++k;
    const double step = scale / std::sqrt(static_cast<double>(k)) / std::sqrt(gn2);
    for (int t = 0; t < T; ++t) x[static_cast<std::size_t>(t)] -= step * grad[static_cast<std::size_t>(t)];

    const double v = objective(x);
    if (v < best_val) {
      best_val = v;
      best = x;
      since_improvement = 0;
    } else if (++since_improvement >= opts.restart_window) {
      x = best;
      scale *= 0.5;
      k = 0;
      since_improvement = 0;
    }
  }
  return evaluate(inst, best);
}

}  // namespace erl
