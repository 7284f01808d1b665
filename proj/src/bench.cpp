#include "erl/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "erl/parallel.hpp"
#include "erl/robustify.hpp"

namespace erl {

namespace {

const std::vector<std::pair<Algorithm, std::string>>& names() {
  static const std::vector<std::pair<Algorithm, std::string>> table{
      {Algorithm::kOpt, "OPT"}, {Algorithm::kRobust, "Robust"}, {Algorithm::kGreedy, "Greedy"},
      {Algorithm::kMl, "ML"},   {Algorithm::kSwitch, "Switch"}, {Algorithm::kRob, "RoB"},
      {Algorithm::kErl, "ERL"}};
  return table;
}

}  // namespace

Algorithm parse_algorithm(const std::string& name) {
  for (const auto& [a, n] : names()) {
    std::string lower = n;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    std::string in = name;
    std::transform(in.begin(), in.end(), in.begin(), [](unsigned char c) { return std::tolower(c); });
    if (in == lower) return a;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm a) {
  for (const auto& [x, n] : names())
    if (x == a) return n;
  return "?";
}

bool needs_params(Algorithm a) {
  return a == Algorithm::kMl || a == Algorithm::kSwitch || a == Algorithm::kRob || a == Algorithm::kErl;
}

Trajectory switch_policy(const Instance& inst, const PolicyParams& params, double threshold) {
  const RobustExpert robust;
  const auto rob = run_expert(inst, robust);
  History hist = inst.initial_history();
  std::vector<Vector> actions;
  double cum = 0.0;
  bool switched = false;
  for (int t = 1; t <= inst.horizon(); ++t) {
    Vector x;
    if (!switched) {
      x = policy_forward(params, hist, inst.context(t));
      const auto c = step_cost(inst, t, x, hist);
      if (cum + c.hit + c.mem > threshold * rob.ledger.cum(static_cast<std::size_t>(t))) switched = true;
    }
    if (switched) x = rob.actions[static_cast<std::size_t>(t - 1)];
    const auto c = step_cost(inst, t, x, hist);
    cum += c.hit + c.mem;
    push_history(hist, x);
    actions.push_back(std::move(x));
  }
  return evaluate(inst, actions);
}

std::vector<double> run_baseline(Algorithm alg, const std::vector<Instance>& dataset, const PolicyParams* params,
                                 double lambda, const BenchOptions& opts) {
  if (needs_params(alg) && params == nullptr) {
    throw ConfigError("algorithm " + algorithm_name(alg) + " needs trained params");
  }
  std::vector<double> costs(dataset.size());
  const RobustExpert robust;
  const GreedyExpert greedy;
  parallel_for(dataset.size(), opts.jobs, [&](std::size_t i) {
    const Instance& inst = dataset[i];
    switch (alg) {
      case Algorithm::kOpt:
        costs[i] = inst.dim() == 1 ? offline_opt_dp(inst, opts.grid).ledger.total()
                                   : offline_opt_subgrad(inst).ledger.total();
        break;
      case Algorithm::kRobust:
        costs[i] = run_expert(inst, robust).ledger.total();
        break;
      case Algorithm::kGreedy:
        costs[i] = run_expert(inst, greedy).ledger.total();
        break;
      case Algorithm::kMl: {
        BpttConfig cfg;
        cfg.mode = RolloutMode::kStandalone;
        costs[i] = policy_rollout(*params, inst, cfg).trajectory.ledger.total();
        break;
      }
      case Algorithm::kSwitch:
        costs[i] = switch_policy(inst, *params, opts.switch_threshold).ledger.total();
        break;
      case Algorithm::kRob:
      case Algorithm::kErl: {
        const auto run = run_erl(inst, robust, lambda, opts.slack_b, policy_proposer(*params));
        const auto r = audit_cr(run.trajectory.ledger.total(), run.expert.ledger.total(), lambda, opts.slack_b);
        if (!r.satisfied) throw InvariantViolation("bench: robustified rollout broke the robustness bound");
        costs[i] = run.trajectory.ledger.total();
        break;
      }
    }
  });
  return costs;
}

std::vector<double> cost_ratios(const std::vector<double>& costs, const std::vector<double>& opt) {
  if (costs.size() != opt.size()) throw DimensionError("cost_ratios: length mismatch");
  std::vector<double> r;
  r.reserve(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i)
    if (opt[i] >= kMinOptCost) r.push_back(costs[i] / opt[i]);
  return r;
}

BenchRow summarize(const std::string& name, const std::vector<double>& costs, const std::vector<double>& opt) {
  if (costs.size() != opt.size()) throw DimensionError("summarize: length mismatch");
  BenchRow row;
  row.algorithm = name;
  row.n_instances = static_cast<int>(costs.size());
  double sum = 0.0, sum_opt = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    sum += costs[i];
    sum_opt += opt[i];
  }
  row.avg_cost_norm = sum_opt > 0.0 ? sum / sum_opt : std::numeric_limits<double>::quiet_NaN();
  const auto ratios = cost_ratios(costs, opt);
  row.n_excluded = row.n_instances - static_cast<int>(ratios.size());
  row.emp_cr = ratios.empty() ? std::numeric_limits<double>::quiet_NaN()
                              : *std::max_element(ratios.begin(), ratios.end());
  return row;
}

Histogram histogram(const std::vector<double>& ratios, double bin_width, double max_ratio) {
  if (ratios.empty()) throw DomainError("histogram: no ratios");
  if (!(bin_width > 0.0) || !(max_ratio > 0.0)) throw DomainError("histogram: width and range must be > 0");
  Histogram h;
  h.bin_width = bin_width;
  h.max_ratio = max_ratio;
  const auto nbins = static_cast<std::size_t>(std::ceil(max_ratio / bin_width - 1e-9));
  std::vector<double> counts(nbins, 0.0);
  double off = 0.0;
  for (double r : ratios) {
    if (r >= max_ratio) {
      off += 1.0;
      continue;
    }
    auto k = static_cast<std::size_t>(std::floor(std::max(r, 0.0) / bin_width));
    counts[std::min(k, nbins - 1)] += 1.0;
  }
  const double n = static_cast<double>(ratios.size());
  for (std::size_t k = 0; k < nbins; ++k) {
    h.bin_left.push_back(static_cast<double>(k) * bin_width);
    h.density.push_back(counts[k] / (n * bin_width));
  }
  h.offchart_mass = off / n;
  return h;
}

BenchReport report(const std::vector<Instance>& dataset, const std::vector<BenchEntry>& entries,
                   const BenchOptions& opts, double bin_width) {
  if (dataset.empty()) throw ConfigError("bench: dataset is empty");
  BenchReport rep;
  rep.opt = run_baseline(Algorithm::kOpt, dataset, nullptr, 1.0, opts);
  rep.rows.push_back(summarize("OPT", rep.opt, rep.opt));
  rep.costs["OPT"] = rep.opt;
  for (const auto& e : entries) {
    if (e.alg == Algorithm::kOpt) continue;
    auto costs = run_baseline(e.alg, dataset, e.params, e.lambda, opts);
    rep.rows.push_back(summarize(e.name, costs, rep.opt));
    const auto ratios = cost_ratios(costs, rep.opt);
    if (!ratios.empty()) rep.histograms[e.name] = histogram(ratios, bin_width);
    rep.costs[e.name] = std::move(costs);
  }
  return rep;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "algorithm,avg_cost_norm,emp_cr,n_instances,n_excluded\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%d,%d\n", r.avg_cost_norm, r.emp_cr, r.n_instances, r.n_excluded);
    out << r.algorithm << buf;
  }
  return out.str();
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream out;
  out << "bin_left,density\n";
  char buf[128];
  for (std::size_t k = 0; k < h.bin_left.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", h.bin_left[k], h.density[k]);
    out << buf;
  }
  return out.str();
}

}  // namespace erl
