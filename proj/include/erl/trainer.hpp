#pragma once

// Mini-batch momentum training of the policy, either end-to-end through the
// robustification layer or as a standalone optimizer.

#include <cstdint>
#include <optional>
#include <vector>

#include "erl/experts.hpp"
#include "erl/policy.hpp"

namespace erl {

class TrainingError : public Error {
 public:
  using Error::Error;
};

struct TrainConfig {
  double lambda = 1.4;
  double slack_b = 0.0;
  int epochs = 140;
  int batch_size = 50;
  double lr = 1e-3;
  double momentum = 0.9;
  std::vector<int> lr_halve_at{80, 120};
  std::uint64_t seed = 1;
  double val_frac = 0.1;
  int hidden = 8;
  int jobs = 0;
  double divergence_factor = 1e3;

  void validate() const;
  // Learning rate used during 1-based epoch e.
  double lr_at(int epoch) const;
};

struct EpochLog {
  int epoch = 0;  // 0 = before any update
  double train_cost = 0.0;
  double val_cost = 0.0;
};

struct TrainResult {
  PolicyParams params;  // snapshot with the lowest validation cost
  std::vector<EpochLog> log;
  int best_epoch = 0;
  long unavailable_grad_steps = 0;
};

// Loss per instance is its post-robustification total cost; the update uses
// the batch mean divided by the mean Robust cost of the training split.
TrainResult train_erl(const std::vector<Instance>& dataset, const Expert& expert, const TrainConfig& cfg,
                      std::optional<PolicyParams> init = std::nullopt);

// Same loop with the raw policy rollout (no projection) as the loss.
TrainResult train_standalone(const std::vector<Instance>& dataset, const TrainConfig& cfg,
                             std::optional<PolicyParams> init = std::nullopt);

// Mean total cost of the policy over a dataset (robustified if cfg.mode says so).
double mean_policy_cost(const PolicyParams& params, const std::vector<Instance>& dataset, const BpttConfig& cfg,
                        int jobs = 0);

std::string training_log_csv(const std::vector<EpochLog>& log);

}  // namespace erl
