#pragma once

// Recurrent ML policy: a small MLP cell fed with the last q actions and the
// current context, unrolled over the horizon. Gradients flow through the
// robustification projection via its KKT conditions.

#include <cstdint>
#include <vector>

#include "erl/core.hpp"
#include "erl/experts.hpp"
#include "erl/robustify.hpp"

namespace erl {

struct PolicyShape {
  int dim = 1;
  int q = 1;
  int hidden1 = 8;
  int hidden2 = 8;

  int input_size() const { return (q + 1) * dim; }
  bool operator==(const PolicyShape&) const = default;
};

// Affine maps around the network: z = (u - in_mean) / in_scale on the way in,
// x_tilde = out_mean + out_scale * o on the way out (component-wise).
struct Normalization {
  Vector in_mean;
  Vector in_scale;
  Vector out_mean;
  Vector out_scale;

  static Normalization identity(const PolicyShape& shape);
  // Mean and spread of the contexts, shared by every input slot.
  static Normalization from_instances(const std::vector<Instance>& instances, const PolicyShape& shape);
};

struct PolicyParams {
  PolicyShape shape;
  Matrix w1, w2, w3;
  Vector b1, b2, b3;
  Normalization norm;
  std::uint64_t seed = 0;

  // Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
  static PolicyParams init(const PolicyShape& shape, std::uint64_t seed);

  // Order: W1, b1, W2, b2, W3, b3; matrices column-major.
  int num_params() const;
  Vector flatten() const;
  void unflatten(const Vector& theta);
  void validate() const;
};

// Intermediate values of one cell evaluation, kept for the backward pass.
struct CellTape {
  Vector z0;  // normalized input
  Vector a1;  // post-ReLU
  Vector a2;  // post-ReLU
  Vector x_tilde;
};

// x_tilde_t from x_{t-1..t-q} (newest first) and y_t.
Vector policy_forward(const PolicyParams& params, const History& history, const Vector& y,
                      CellTape* tape = nullptr);

// Accumulates dL/dtheta into grad (flattened layout) given dL/dx_tilde, and
// returns dL/dx_{t-i} for i = 1..q.
std::vector<Vector> policy_backward(const PolicyParams& params, const CellTape& tape, const Vector& g_x_tilde,
                                    Vector& grad);

// Derivatives of the projected action x with respect to the proposal, the
// cumulative cost of x_{1:t-1}, and the history x_{t-i}.
struct ProjectionJacobians {
  Matrix dx_dxtilde;
  Vector dx_dcost;
  std::vector<Matrix> dx_dhist;  // i = 1..q
};

// Implicit differentiation of the projection's KKT system. An inactive
// constraint gives (I, 0, 0).
ProjectionJacobians projection_grads(const RobustConstraint& g, const Vector& x_tilde,
                                     const ProjectionResult& proj);

enum class RolloutMode { kRobustified, kStandalone };

struct BpttConfig {
  RolloutMode mode = RolloutMode::kRobustified;
  const Expert* expert = nullptr;  // required when robustified
  double lambda = 1.4;
  double slack_b = 0.0;
  ProjectOptions project{};
  bool keep_step_grads = false;
};

struct Rollout {
  Trajectory trajectory;
  ExpertTrace expert;  // empty in standalone mode
  std::vector<Vector> proposals;
  std::vector<CellTape> cells;
  std::vector<History> histories;  // x_{t-1..t-q} fed to step t
  std::vector<ProjectionJacobians> jacobians;
  int unavailable_steps = 0;  // non-finite projection Jacobians, treated as constant steps
};

Rollout policy_rollout(const PolicyParams& params, const Instance& inst, const BpttConfig& cfg,
                       bool with_jacobians = false);

struct BpttResult {
  double loss = 0.0;  // total cost of the rolled-out trajectory
  double expert_cost = 0.0;
  Vector grad;
  std::vector<Vector> step_grads;  // parameter gradient contributed by each step's cell
  int unavailable_steps = 0;
};

// dLoss/dtheta by backpropagation through time, including the projection.
// Throws Error naming the step if a non-finite gradient appears.
BpttResult bptt(const PolicyParams& params, const Instance& inst, const BpttConfig& cfg);

// Proposer for run_erl that evaluates the policy on ERL's own history.
Proposer policy_proposer(const PolicyParams& params);

}  // namespace erl
