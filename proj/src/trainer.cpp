#include "erl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "erl/parallel.hpp"

namespace erl {

void TrainConfig::validate() const {
  if (!(lambda >= 1.0)) throw ConfigError("train: lambda must be >= 1");
  if (!(slack_b >= 0.0)) throw ConfigError("train: B must be >= 0");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train: lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must be in [0, 1)");
  if (!(val_frac >= 0.0 && val_frac < 1.0)) throw ConfigError("train: val_frac must be in [0, 1)");
  if (hidden < 1) throw ConfigError("train: hidden must be >= 1");
}

double TrainConfig::lr_at(int epoch) const {
  double r = lr;
  for (int e : lr_halve_at)
    if (epoch >= e) r *= 0.5;
  return r;
}

namespace {

struct Split {
  std::vector<const Instance*> train;
  std::vector<const Instance*> val;
};

Split split_dataset(const std::vector<Instance>& data, double val_frac, std::uint64_t seed) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(idx.begin(), idx.end(), rng);
  auto n_val = static_cast<std::size_t>(std::floor(val_frac * static_cast<double>(data.size())));
  if (val_frac > 0.0 && n_val == 0 && data.size() >= 2) n_val = 1;
  Split s;
  for (std::size_t k = 0; k < idx.size(); ++k) (k < n_val ? s.val : s.train).push_back(&data[idx[k]]);
  if (s.val.empty()) s.val = s.train;
  return s;
}

double mean_cost(const PolicyParams& params, const std::vector<const Instance*>& set, const BpttConfig& cfg,
                 int jobs) {
  std::vector<double> costs(set.size());
  parallel_for(set.size(), jobs, [&](std::size_t i) {
    const auto ro = policy_rollout(params, *set[i], cfg);
    const double c = ro.trajectory.ledger.total();
    if (cfg.mode == RolloutMode::kRobustified) {
      const auto r = audit_cr(c, ro.expert.ledger.total(), cfg.lambda, cfg.slack_b);
      if (!r.satisfied) throw InvariantViolation("training evaluation rollout broke the robustness bound");
    }
    costs[i] = c;
  });
  double s = 0.0;
  for (double c : costs) s += c;
  return set.empty() ? 0.0 : s / static_cast<double>(set.size());
}

TrainResult train_loop(const std::vector<Instance>& dataset, const TrainConfig& cfg, RolloutMode mode,
                       const Expert* expert, std::optional<PolicyParams> init) {
  cfg.validate();
  if (dataset.empty()) throw ConfigError("train: dataset is empty");
  const Instance& first = dataset.front();
  for (const auto& inst : dataset) {
    if (inst.dim() != first.dim() || inst.memory.q() != first.memory.q()) {
      throw ConfigError("train: all instances must share dimension and memory length");
    }
  }
  const Split split = split_dataset(dataset, cfg.val_frac, cfg.seed);

  PolicyParams params;
  if (init) {
    params = std::move(*init);
    params.validate();
  } else {
    const PolicyShape shape{first.dim(), first.memory.q(), cfg.hidden, cfg.hidden};
    params = PolicyParams::init(shape, cfg.seed);
    std::vector<Instance> train_copy;
    train_copy.reserve(split.train.size());
    for (const auto* p : split.train) train_copy.push_back(*p);
    params.norm = Normalization::from_instances(train_copy, shape);
  }

  BpttConfig bc;
  bc.mode = mode;
  bc.expert = expert;
  bc.lambda = cfg.lambda;
  bc.slack_b = cfg.slack_b;

  // Loss scale: mean Robust cost on the training split, so that the step
  // size does not depend on the units of the workload.
  const RobustExpert robust;
  double scale = 0.0;
  for (const auto* inst : split.train) scale += run_expert(*inst, robust).ledger.total();
  scale /= static_cast<double>(split.train.size());
  if (!(scale > 0.0)) scale = 1.0;

  TrainResult res;
  const double init_train = mean_cost(params, split.train, bc, cfg.jobs);
  // With no held-out split the snapshot is chosen on the training set.
  const auto& val_set = split.val.empty() ? split.train : split.val;
  double best_val = mean_cost(params, val_set, bc, cfg.jobs);
  res.log.push_back({0, init_train, best_val});
  res.params = params;
  res.best_epoch = 0;

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), 0);
  Vector theta = params.flatten();
  Vector velocity = Vector::Zero(theta.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.lr_at(epoch);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t n = end - start;
      std::vector<BpttResult> parts(n);
      parallel_for(n, cfg.jobs, [&](std::size_t k) { parts[k] = bptt(params, *split.train[order[start + k]], bc); });
      Vector grad = Vector::Zero(theta.size());
      for (const auto& part : parts) {
        if (mode == RolloutMode::kRobustified && !audit_cr(part.loss, part.expert_cost, cfg.lambda, cfg.slack_b).satisfied) {
          throw InvariantViolation("training rollout broke the robustness bound");
        }
        grad += part.grad;
        epoch_loss += part.loss;
        res.unavailable_grad_steps += part.unavailable_steps;
      }
      grad /= static_cast<double>(n) * scale;
      velocity = cfg.momentum * velocity - lr * grad;
      theta += velocity;
      params.unflatten(theta);
    }
    const double train_cost = epoch_loss / static_cast<double>(order.size());
    if (!std::isfinite(train_cost) || train_cost > cfg.divergence_factor * std::max(init_train, 1e-300)) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "training diverged at epoch %d: mean cost %.6g vs initial %.6g", epoch,
                    train_cost, init_train);
      throw TrainingError(buf);
    }
    const double val = mean_cost(params, val_set, bc, cfg.jobs);
    res.log.push_back({epoch, train_cost, val});
    if (val < best_val) {
      best_val = val;
      res.params = params;
      res.best_epoch = epoch;
    }
  }
  return res;
}

}  // namespace

TrainResult train_erl(const std::vector<Instance>& dataset, const Expert& expert, const TrainConfig& cfg,
                      std::optional<PolicyParams> init) {
  return train_loop(dataset, cfg, RolloutMode::kRobustified, &expert, std::move(init));
}

TrainResult train_standalone(const std::vector<Instance>& dataset, const TrainConfig& cfg,
                             std::optional<PolicyParams> init) {
  return train_loop(dataset, cfg, RolloutMode::kStandalone, nullptr, std::move(init));
}

double mean_policy_cost(const PolicyParams& params, const std::vector<Instance>& dataset, const BpttConfig& cfg,
                        int jobs) {
  std::vector<const Instance*> set;
  set.reserve(dataset.size());
  for (const auto& inst : dataset) set.push_back(&inst);
  return mean_cost(params, set, cfg, jobs);
}

std::string training_log_csv(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out << "epoch,train_cost,val_cost\n";
  char buf[128];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", e.epoch, e.train_cost, e.val_cost);
    out << buf;
  }
  return out.str();
}

}  // namespace erl
