#include "erl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <random>

#include "erl/error.hpp"
#include "erl/kernels.hpp"

namespace erl {

Normalization Normalization::identity(const PolicyShape& shape) {
  Normalization n;
  n.in_mean = Vector::Zero(shape.input_size());
  n.in_scale = Vector::Ones(shape.input_size());
  n.out_mean = Vector::Zero(shape.dim);
  n.out_scale = Vector::Ones(shape.dim);
  return n;
}

Normalization Normalization::from_instances(const std::vector<Instance>& instances, const PolicyShape& shape) {
  const int d = shape.dim;
  Vector sum = Vector::Zero(d), sq = Vector::Zero(d);
  double count = 0.0;
  for (const auto& inst : instances) {
    for (const auto& y : inst.contexts) {
      sum += y;
      sq += y.cwiseProduct(y);
      count += 1.0;
    }
  }
  Normalization n = identity(shape);
  if (count == 0.0) return n;
  const Vector mean = sum / count;
  Vector sd = (sq / count - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt();
  for (int j = 0; j < d; ++j) {
    if (!(sd[j] > 1e-12 * (1.0 + std::abs(mean[j])))) sd[j] = std::max(1.0, std::abs(mean[j]));
  }
  for (int s = 0; s <= shape.q; ++s) {
    n.in_mean.segment(s * d, d) = mean;
    n.in_scale.segment(s * d, d) = sd;
  }
  n.out_mean = mean;
  n.out_scale = sd;
  return n;
}

PolicyParams PolicyParams::init(const PolicyShape& shape, std::uint64_t seed) {
  if (shape.dim < 1 || shape.q < 1 || shape.hidden1 < 1 || shape.hidden2 < 1) {
    throw DomainError("policy: layer sizes must be >= 1");
  }
  PolicyParams p;
  p.shape = shape;
  p.seed = seed;
  p.norm = Normalization::identity(shape);
  std::mt19937_64 rng(seed);
  auto layer = [&](Matrix& w, Vector& b, int rows, int cols) {
    const double r = 1.0 / std::sqrt(static_cast<double>(cols));
    std::uniform_real_distribution<double> u(-r, r);
    w.resize(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) w(i, j) = u(rng);
    b = Vector::Zero(rows);
  };
  layer(p.w1, p.b1, shape.hidden1, shape.input_size());
  layer(p.w2, p.b2, shape.hidden2, shape.hidden1);
  layer(p.w3, p.b3, shape.dim, shape.hidden2);
  return p;
}

int PolicyParams::num_params() const {
  return static_cast<int>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size());
}

Vector PolicyParams::flatten() const {
  Vector theta(num_params());
  Eigen::Index off = 0;
  auto put = [&](const double* src, Eigen::Index n) {
    theta.segment(off, n) = Eigen::Map<const Vector>(src, n);
    off += n;
  };
  put(w1.data(), w1.size());
  put(b1.data(), b1.size());
  put(w2.data(), w2.size());
  put(b2.data(), b2.size());
  put(w3.data(), w3.size());
  put(b3.data(), b3.size());
  return theta;
}

void PolicyParams::unflatten(const Vector& theta) {
  if (theta.size() != num_params()) throw DimensionError("policy: parameter vector has the wrong length");
  Eigen::Index off = 0;
  auto get = [&](double* dst, Eigen::Index n) {
    Eigen::Map<Vector>(dst, n) = theta.segment(off, n);
    off += n;
  };
  get(w1.data(), w1.size());
  get(b1.data(), b1.size());
  get(w2.data(), w2.size());
  get(b2.data(), b2.size());
  get(w3.data(), w3.size());
  get(b3.data(), b3.size());
}

void PolicyParams::validate() const {
  const auto& s = shape;
  auto check = [](bool ok, const char* what) {
    if (!ok) throw DimensionError(std::string("policy: ") + what);
  };
  check(w1.rows() == s.hidden1 && w1.cols() == s.input_size() && b1.size() == s.hidden1, "layer 1 shape");
  check(w2.rows() == s.hidden2 && w2.cols() == s.hidden1 && b2.size() == s.hidden2, "layer 2 shape");
  check(w3.rows() == s.dim && w3.cols() == s.hidden2 && b3.size() == s.dim, "output layer shape");
  check(norm.in_mean.size() == s.input_size() && norm.in_scale.size() == s.input_size(), "input normalization");
  check(norm.out_mean.size() == s.dim && norm.out_scale.size() == s.dim, "output normalization");
  if (!(norm.in_scale.array() > 0.0).all()) throw DomainError("policy: input scale must be positive");
}

Vector policy_forward(const PolicyParams& params, const History& history, const Vector& y, CellTape* tape) {
  const auto& s = params.shape;
  if (static_cast<int>(history.size()) != s.q) throw DimensionError("policy: history must hold q actions");
  if (y.size() != s.dim) throw DimensionError("policy: context dimension mismatch");
  Vector z0(s.input_size());
  for (int i = 0; i < s.q; ++i) z0.segment(i * s.dim, s.dim) = history[i];
  z0.segment(s.q * s.dim, s.dim) = y;
  z0 = (z0 - params.norm.in_mean).cwiseQuotient(params.norm.in_scale);

  Vector a1(s.hidden1), a2(s.hidden2), o(s.dim);
  kernels::dense_affine(params.w1.data(), s.hidden1, s.input_size(), z0.data(), params.b1.data(), true, a1.data());
  kernels::dense_affine(params.w2.data(), s.hidden2, s.hidden1, a1.data(), params.b2.data(), true, a2.data());
  kernels::dense_affine(params.w3.data(), s.dim, s.hidden2, a2.data(), params.b3.data(), false, o.data());
  Vector x = params.norm.out_mean + params.norm.out_scale.cwiseProduct(o);
  if (tape) {
    tape->z0 = std::move(z0);
    tape->a1 = std::move(a1);
    tape->a2 = std::move(a2);
    tape->x_tilde = x;
  }
  return x;
}

std::vector<Vector> policy_backward(const PolicyParams& params, const CellTape& tape, const Vector& g_x_tilde,
                                    Vector& grad) {
  const auto& s = params.shape;
  if (grad.size() != params.num_params()) grad = Vector::Zero(params.num_params());
  const Eigen::Index n_w1 = params.w1.size(), n_b1 = params.b1.size();
  const Eigen::Index n_w2 = params.w2.size(), n_b2 = params.b2.size();
  const Eigen::Index n_w3 = params.w3.size();
  Eigen::Index off = 0;
  auto w_block = [&](Eigen::Index n, int rows, int cols) {
    Eigen::Map<Matrix> m(grad.data() + off, rows, cols);
    off += n;
    return m;
  };
  auto b_block = [&](Eigen::Index n) {
    Eigen::Map<Vector> v(grad.data() + off, n);
    off += n;
    return v;
  };
  auto gw1 = w_block(n_w1, s.hidden1, s.input_size());
  auto gb1 = b_block(n_b1);
  auto gw2 = w_block(n_w2, s.hidden2, s.hidden1);
  auto gb2 = b_block(n_b2);
  auto gw3 = w_block(n_w3, s.dim, s.hidden2);
  auto gb3 = b_block(params.b3.size());

  const Vector g_o = params.norm.out_scale.cwiseProduct(g_x_tilde);
  gw3.noalias() += g_o * tape.a2.transpose();
  gb3 += g_o;
  Vector g2 = params.w3.transpose() * g_o;
  for (int i = 0; i < s.hidden2; ++i)
    if (!(tape.a2[i] > 0.0)) g2[i] = 0.0;
  gw2.noalias() += g2 * tape.a1.transpose();
  gb2 += g2;
  Vector g1 = params.w2.transpose() * g2;
  for (int i = 0; i < s.hidden1; ++i)
    if (!(tape.a1[i] > 0.0)) g1[i] = 0.0;
  gw1.noalias() += g1 * tape.z0.transpose();
  gb1 += g1;
  const Vector g_u = (params.w1.transpose() * g1).cwiseQuotient(params.norm.in_scale);

  std::vector<Vector> g_hist;
  g_hist.reserve(static_cast<std::size_t>(s.q));
  for (int i = 0; i < s.q; ++i) g_hist.push_back(g_u.segment(i * s.dim, s.dim));
  return g_hist;
}

namespace {

// One-sided slope of a scalar piecewise-linear constraint, taken on the side
// facing the proposal. At a kink the plain subgradient would be zero.
std::optional<double> facing_slope(const RobustConstraint& g, double x, double xt) {
  const auto terms = g.scalar_terms();
  if (!terms) return std::nullopt;
  double s = 0.0;
  const bool right = xt > x;
  for (const auto& t : *terms) {
    const double r = t.slope * x - t.center;
    const double kink = right ? std::abs(t.slope) : -std::abs(t.slope);
    s += t.weight * (r > 0 ? t.slope : r < 0 ? -t.slope : kink);
  }
  return s;
}

}  // namespace

ProjectionJacobians projection_grads(const RobustConstraint& g, const Vector& x_tilde,
                                     const ProjectionResult& proj) {
  const int d = g.dim();
  const int q = g.q();
  ProjectionJacobians j;
  j.dx_dxtilde = Matrix::Identity(d, d);
  j.dx_dcost = Vector::Zero(d);
  j.dx_dhist.assign(static_cast<std::size_t>(q), Matrix::Zero(d, d));
  if (!proj.active || proj.mu <= 0.0) return j;

  const Vector& x = proj.x;
  const double mu = proj.mu;
  Vector grad = g.gradient(x);
  if (d == 1) {
    if (auto s = facing_slope(g, x[0], x_tilde[0])) grad[0] = *s;
  }
  const Matrix d11 = Matrix::Identity(d, d) + mu * g.hessian(x);
  const Eigen::LDLT<Matrix> d11_inv(d11);
  const Vector d11_inv_grad = d11_inv.solve(grad);
  // Active constraint: complementary slackness gives g(x) = 0 exactly.
  const double sc = -mu * grad.dot(d11_inv_grad);
  const double sc_scale = mu * grad.squaredNorm();
  const double sc_inv = std::abs(sc) > 1e-14 * std::max(1.0, sc_scale) ? 1.0 / sc : 0.0;

  const Matrix d11_inv_mat = d11_inv.solve(Matrix::Identity(d, d));
  // First block row [K11 K12] of the inverse KKT matrix.
  const Matrix k11 = d11_inv_mat + d11_inv_grad * (sc_inv * mu) * d11_inv_grad.transpose();
  const Vector k12 = -d11_inv_grad * sc_inv;
  j.dx_dxtilde = k11;
  j.dx_dcost = -mu * k12;
  for (int i = 1; i <= q; ++i) {
    Vector a = g.history_gradient(x, i);
    const Matrix m = g.history_cross_hessian(x, i);
    j.dx_dhist[static_cast<std::size_t>(i - 1)] = -mu * (k11 * m) - mu * (k12 * a.transpose());
  }
  return j;
}

namespace {

void check_config(const BpttConfig& cfg) {
  if (cfg.mode == RolloutMode::kRobustified && cfg.expert == nullptr) {
    throw ConfigError("robustified rollout needs an expert");
  }
}

void check_shape(const PolicyParams& params, const Instance& inst) {
  if (params.shape.dim != inst.dim() || params.shape.q != inst.memory.q()) {
    throw DimensionError("policy shape does not match the instance (dim/q)");
  }
}

}  // namespace

Rollout policy_rollout(const PolicyParams& params, const Instance& inst, const BpttConfig& cfg, bool with_jacobians) {
  check_config(cfg);
  check_shape(params, inst);
  const int T = inst.horizon();
  Rollout out;
  out.proposals.reserve(static_cast<std::size_t>(T));
  out.cells.reserve(static_cast<std::size_t>(T));
  out.histories.reserve(static_cast<std::size_t>(T));

  if (cfg.mode == RolloutMode::kStandalone) {
    History hist = inst.initial_history();
    std::vector<Vector> actions;
    actions.reserve(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
      CellTape tape;
      Vector x = policy_forward(params, hist, inst.context(t), &tape);
      out.histories.push_back(hist);
      push_history(hist, x);
      out.proposals.push_back(x);
      out.cells.push_back(std::move(tape));
      actions.push_back(std::move(x));
    }
    out.trajectory = evaluate(inst, actions);
    return out;
  }

  ErlState state(inst, *cfg.expert, cfg.lambda, cfg.slack_b, cfg.project);
  const auto cost = inst.hitting();
  if (with_jacobians) out.jacobians.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    CellTape tape;
    out.histories.push_back(state.history());
    Vector xt = policy_forward(params, state.history(), inst.context(t), &tape);
    const auto step = erl_step(state, xt);
    if (with_jacobians) {
      const RobustConstraint g(cost, inst.memory, step.context, step.budget.value());
      auto jac = projection_grads(g, xt, step.projection);
      if (!jac.dx_dxtilde.allFinite() || !jac.dx_dcost.allFinite() ||
          std::any_of(jac.dx_dhist.begin(), jac.dx_dhist.end(), [](const Matrix& m) { return !m.allFinite(); })) {
        jac.dx_dxtilde.setZero();
        jac.dx_dcost.setZero();
        for (auto& m : jac.dx_dhist) m.setZero();
        ++out.unavailable_steps;
      }
      out.jacobians.push_back(std::move(jac));
    }
    out.proposals.push_back(std::move(xt));
    out.cells.push_back(std::move(tape));
  }
  out.trajectory.actions = state.ledger().actions();
  out.trajectory.ledger = state.ledger();
  out.expert.actions = state.expert().ledger().actions();
  out.expert.ledger = state.expert().ledger();
  return out;
}

BpttResult bptt(const PolicyParams& params, const Instance& inst, const BpttConfig& cfg) {
  const Rollout ro = policy_rollout(params, inst, cfg, cfg.mode == RolloutMode::kRobustified);
  const int T = inst.horizon();
  const int q = inst.memory.q();
  const int d = inst.dim();
  const double p = inst.p();
  const auto& actions = ro.trajectory.actions;

  BpttResult res;
  res.loss = ro.trajectory.ledger.total();
  res.expert_cost = cfg.mode == RolloutMode::kRobustified ? ro.expert.ledger.total() : 0.0;
  res.grad = Vector::Zero(params.num_params());
  res.unavailable_steps = ro.unavailable_steps;
  if (cfg.keep_step_grads) res.step_grads.assign(static_cast<std::size_t>(T), Vector());

  // g_x[t] = dL/dx_t for t = 1..T (index t-1); initial actions are constants.
  std::vector<Vector> g_x(static_cast<std::size_t>(T), Vector::Zero(d));
  double g_cum = 1.0;  // dL/dcum_t, L = cum_T
  auto add_hist = [&](int t, int i, const Vector& v) {
    if (t - i >= 1) g_x[static_cast<std::size_t>(t - i - 1)] += v;
  };

  for (int t = T; t >= 1; --t) {
    const auto ti = static_cast<std::size_t>(t - 1);
    const History& hist = ro.histories[ti];
    const Vector& x = actions[ti];
    // cum_t = cum_{t-1} + f(x_t, y_t) + ||x_t - sum_i C_i x_{t-i}||
    const Vector r_mem = x - inst.memory.predicted(hist);
    const Vector s_mem = lp_norm_subgradient(r_mem, p);
    g_x[ti] += g_cum * (inst.alpha * lp_norm_subgradient(x - inst.context(t), p) + s_mem);
    for (int i = 1; i <= q; ++i) add_hist(t, i, -g_cum * (inst.memory.coeff(i).transpose() * s_mem));

    Vector g_xt = g_x[ti];
    if (cfg.mode == RolloutMode::kRobustified) {
      const auto& jac = ro.jacobians[ti];
      g_xt = jac.dx_dxtilde.transpose() * g_x[ti];
      g_cum += jac.dx_dcost.dot(g_x[ti]);
      for (int i = 1; i <= q; ++i) {
        add_hist(t, i, jac.dx_dhist[static_cast<std::size_t>(i - 1)].transpose() * g_x[ti]);
      }
    }

    Vector step_grad = Vector::Zero(params.num_params());
    const auto g_hist = policy_backward(params, ro.cells[ti], g_xt, step_grad);
    if (!step_grad.allFinite()) throw Error("bptt: non-finite gradient at step t = " + std::to_string(t));
    for (int i = 1; i <= q; ++i) add_hist(t, i, g_hist[static_cast<std::size_t>(i - 1)]);
    res.grad += step_grad;
    if (cfg.keep_step_grads) res.step_grads[ti] = std::move(step_grad);
  }
  return res;
}

Proposer policy_proposer(const PolicyParams& params) {
  return [&params](const ErlState& state, int t) {
    return policy_forward(params, state.history(), state.instance().context(t));
  };
}

}  // namespace erl
