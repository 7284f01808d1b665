#pragma once

// Baseline runner and reporting: normalized average cost, empirical
// competitive ratio and cost-ratio histograms over a dataset.

#include <map>
#include <string>
#include <vector>

#include "erl/experts.hpp"
#include "erl/policy.hpp"

namespace erl {

enum class Algorithm { kOpt, kRobust, kGreedy, kMl, kSwitch, kRob, kErl };

Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm a);
bool needs_params(Algorithm a);

struct BenchOptions {
  GridSpec grid{};
  double switch_threshold = 1.4;
  double slack_b = 0.0;
  int jobs = 0;
};

// Per-instance total costs. ML is the raw policy rollout; RoB and ERL wrap
// the policy with the projection against Robust (they differ only in which
// params the caller passes). OPT uses the grid DP for d = 1, else subgradient.
std::vector<double> run_baseline(Algorithm alg, const std::vector<Instance>& dataset, const PolicyParams* params,
                                 double lambda, const BenchOptions& opts = {});

// Follows the policy while its cumulative cost stays within threshold x the
// cumulative cost of Robust alone; from the first step that would break this
// it plays Robust's actions until the end.
Trajectory switch_policy(const Instance& inst, const PolicyParams& params, double threshold);

struct BenchRow {
  std::string algorithm;
  double avg_cost_norm = 0.0;  // mean cost / mean OPT cost
  double emp_cr = 0.0;         // max cost / OPT cost
  int n_instances = 0;
  int n_excluded = 0;          // OPT cost below 1e-12: left out of ratios
};

inline constexpr double kMinOptCost = 1e-12;

BenchRow summarize(const std::string& name, const std::vector<double>& costs, const std::vector<double>& opt);
// cost / OPT for instances with OPT >= kMinOptCost.
std::vector<double> cost_ratios(const std::vector<double>& costs, const std::vector<double>& opt);

struct Histogram {
  double bin_width = 0.1;
  double max_ratio = 4.0;
  std::vector<double> bin_left;
  std::vector<double> density;  // count / (N * width)
  double offchart_mass = 0.0;   // fraction with ratio >= max_ratio
};

Histogram histogram(const std::vector<double>& ratios, double bin_width, double max_ratio = 4.0);

struct BenchEntry {
  std::string name;  // row label, e.g. "ERL(1.4)"
  Algorithm alg;
  double lambda = 1.0;
  const PolicyParams* params = nullptr;
};

struct BenchReport {
  std::vector<BenchRow> rows;  // OPT first
  std::vector<double> opt;
  std::map<std::string, std::vector<double>> costs;
  std::map<std::string, Histogram> histograms;
};

BenchReport report(const std::vector<Instance>& dataset, const std::vector<BenchEntry>& entries,
                   const BenchOptions& opts = {}, double bin_width = 0.1);

std::string bench_csv(const std::vector<BenchRow>& rows);
std::string histogram_csv(const Histogram& h);

}  // namespace erl
