#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "erl/bench.hpp"
#include "erl/data.hpp"
#include "erl/io.hpp"
#include "erl/kernels.hpp"
#include "erl/parallel.hpp"
#include "erl/robustify.hpp"
#include "erl/trainer.hpp"

namespace erl::cli {

namespace {

using nlohmann::json;

void write_meta(const std::string& path, const std::vector<std::string>& args, const std::string& subcommand,
                json extra) {
  json j = std::move(extra);
  j["tool"] = "erl";
  j["subcommand"] = subcommand;
  j["argv"] = args;
  j["isa"] = kernels::isa_name(kernels::active_isa());
  write_text_file(path, j.dump(1) + "\n");
}

std::string meta_path_for(const std::string& output) { return output + ".meta.json"; }

int cmd_gen_data(const std::vector<std::string>& args, std::uint64_t seed, int hours, const std::string& regime,
                 const std::string& trace_in, const std::string& trace_out, const std::string& out, double alpha,
                 int window) {
  std::vector<WeatherRecord> records;
  if (!trace_in.empty()) {
    std::ifstream in(trace_in);
    if (!in) throw ConfigError("cannot open trace '" + trace_in + "'");
    records = read_trace_csv(in);
  } else {
    records = synthetic_weather(seed, hours, parse_regime(regime));
  }
  if (!trace_out.empty()) {
    std::ofstream t(trace_out, std::ios::trunc);
    if (!t) throw ConfigError("cannot open '" + trace_out + "' for writing");
    write_trace_csv(t, records);
  }
  EnergyParams ep;
  ep.alpha = alpha;
  const auto dataset = make_sequences(records, ep, window);
  const std::string text = dataset_to_json(dataset);
  write_text_file(out, text);
  write_meta(meta_path_for(out), args, "gen-data",
             {{"seed", seed}, {"regime", regime}, {"records", records.size()}, {"instances", dataset.size()},
              {"dataset_hash", fnv1a_hex(text)}});
  std::printf("wrote %zu instances to %s\n", dataset.size(), out.c_str());
  return kExitOk;
}

struct TrainFlags {
  std::string config;
  std::optional<double> lambda, slack_b, lr;
  std::optional<int> epochs, batch_size;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> dataset_path, out_path;
  std::string mode = "erl";
  std::string log;
  int jobs = 0;
};

int cmd_train(const std::vector<std::string>& args, const TrainFlags& f) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = run_config_from_json(read_text_file(f.config));
  if (f.lambda) cfg.train.lambda = *f.lambda;
  if (f.slack_b) cfg.train.slack_b = *f.slack_b;
  if (f.lr) cfg.train.lr = *f.lr;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.batch_size) cfg.train.batch_size = *f.batch_size;
  if (f.seed) cfg.train.seed = *f.seed;
  if (f.dataset_path) cfg.dataset_path = *f.dataset_path;
  if (f.out_path) cfg.out_path = *f.out_path;
  cfg.train.jobs = f.jobs;
  if (cfg.dataset_path.empty()) throw ConfigError("train: dataset_path is required");
  if (cfg.out_path.empty()) throw ConfigError("train: out_path is required");
  if (f.mode != "erl" && f.mode != "standalone") throw ConfigError("train: --mode must be erl or standalone");

  const auto dataset = dataset_from_json(read_text_file(cfg.dataset_path));
  const RobustExpert robust;
  const TrainResult res =
      f.mode == "erl" ? train_erl(dataset, robust, cfg.train) : train_standalone(dataset, cfg.train);
  const std::string text = params_to_json(res.params);
  write_text_file(cfg.out_path, text);
  const std::string log_path = f.log.empty() ? cfg.out_path + ".log.csv" : f.log;
  write_text_file(log_path, training_log_csv(res.log));
  write_meta(meta_path_for(cfg.out_path), args, "train",
             {{"config", json::parse(run_config_to_json(cfg))},
              {"mode", f.mode},
              {"seed", cfg.train.seed},
              {"best_epoch", res.best_epoch},
              {"unavailable_grad_steps", res.unavailable_grad_steps},
              {"params_hash", fnv1a_hex(text)}});
  std::printf("trained %s policy: best epoch %d, validation cost %.6g -> %s\n", f.mode.c_str(), res.best_epoch,
              res.log[static_cast<std::size_t>(res.best_epoch)].val_cost, cfg.out_path.c_str());
  return kExitOk;
}

std::string lambda_label(const std::string& alg, double lambda) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s(%g)", alg.c_str(), lambda);
  return buf;
}

void write_report(const BenchReport& rep, const std::string& csv_path, const std::string& hist_dir) {
  write_text_file(csv_path, bench_csv(rep.rows));
  if (hist_dir.empty()) return;
  for (const auto& [name, h] : rep.histograms) {
    write_text_file((std::filesystem::path(hist_dir) / ("hist_" + name + ".csv")).string(), histogram_csv(h));
  }
}

json offchart(const BenchReport& rep) {
  json j = json::object();
  for (const auto& [name, h] : rep.histograms) j[name] = h.offchart_mass;
  return j;
}

int cmd_eval(const std::vector<std::string>& args, const std::string& params_path, const std::string& dataset_path,
             double lambda, double slack_b, const std::string& out, int jobs) {
  const auto dataset = dataset_from_json(read_text_file(dataset_path));
  const std::string ptext = read_text_file(params_path);
  const PolicyParams params = params_from_json(ptext);
  BenchOptions opts;
  opts.slack_b = slack_b;
  opts.jobs = jobs;
  const std::vector<BenchEntry> entries{{"Robust", Algorithm::kRobust, 1.0, nullptr},
                                        {"ML", Algorithm::kMl, 1.0, &params},
                                        {lambda_label("ERL", lambda), Algorithm::kErl, lambda, &params}};
  const auto rep = report(dataset, entries, opts);
  write_report(rep, out, "");
  write_meta(meta_path_for(out), args, "eval",
             {{"lambda", lambda}, {"B", slack_b}, {"params_hash", fnv1a_hex(ptext)},
              {"dataset_hash", fnv1a_hex(read_text_file(dataset_path))}});
  std::cout << bench_csv(rep.rows);
  return kExitOk;
}

struct BenchFlags {
  std::string dataset, erl_params, rob_params, out_dir = ".";
  std::vector<double> lambdas{1.4};
  double slack_b = 0.0, switch_threshold = 1.4, bin_width = 0.1;
  int grid_n = 2001;
  int jobs = 0;
};

int cmd_bench(const std::vector<std::string>& args, const BenchFlags& f) {
  const std::string dtext = read_text_file(f.dataset);
  const auto dataset = dataset_from_json(dtext);
  std::optional<PolicyParams> erl_p, rob_p;
  json hashes = json::object();
  if (!f.erl_params.empty()) {
    const auto t = read_text_file(f.erl_params);
    erl_p = params_from_json(t);
    hashes["erl"] = fnv1a_hex(t);
  }
  if (!f.rob_params.empty()) {
    const auto t = read_text_file(f.rob_params);
    rob_p = params_from_json(t);
    hashes["standalone"] = fnv1a_hex(t);
  }
  std::vector<BenchEntry> entries{{"Robust", Algorithm::kRobust, 1.0, nullptr},
                                  {"Greedy", Algorithm::kGreedy, 1.0, nullptr}};
  if (rob_p) {
    entries.push_back({"ML", Algorithm::kMl, 1.0, &*rob_p});
    entries.push_back({"Switch", Algorithm::kSwitch, 1.0, &*rob_p});
    for (double l : f.lambdas) entries.push_back({lambda_label("RoB", l), Algorithm::kRob, l, &*rob_p});
  }
  if (erl_p) {
    for (double l : f.lambdas) entries.push_back({lambda_label("ERL", l), Algorithm::kErl, l, &*erl_p});
  }
  BenchOptions opts;
  opts.slack_b = f.slack_b;
  opts.switch_threshold = f.switch_threshold;
  opts.grid.n = f.grid_n;
  opts.jobs = f.jobs;
  std::filesystem::create_directories(f.out_dir);
  const auto rep = report(dataset, entries, opts, f.bin_width);
  const auto dir = std::filesystem::path(f.out_dir);
  write_report(rep, (dir / "bench.csv").string(), f.out_dir);
  write_meta((dir / "run_meta.json").string(), args, "bench",
             {{"lambdas", f.lambdas},
              {"B", f.slack_b},
              {"switch_threshold", f.switch_threshold},
              {"grid_n", f.grid_n},
              {"params_hashes", hashes},
              {"dataset_hash", fnv1a_hex(dtext)},
              {"offchart_mass", offchart(rep)}});
  std::cout << bench_csv(rep.rows);
  return kExitOk;
}

struct ProjectFlags {
  double x_tilde = 0.0, y = 0.0, cum_prev = 0.0, expert_cum = 0.0, lambda = 1.4, slack_b = 0.0, alpha = 0.2;
  double p = 2.0;
  int t = 1, horizon = 1;
  std::vector<double> history{0.0}, expert_window{0.0, 0.0}, coeffs{1.0};
};

int cmd_project(const ProjectFlags& f) {
  const MemorySpec spec = MemorySpec::scaled_identity(1, f.coeffs, f.p);
  StepContext ctx;
  ctx.t = f.t;
  ctx.horizon = f.horizon;
  ctx.cum_prev = f.cum_prev;
  ctx.y = Vector::Constant(1, f.y);
  for (double h : f.history) ctx.history.push_back(Vector::Constant(1, h));
  for (double e : f.expert_window) ctx.expert_window.push_back(Vector::Constant(1, e));
  if (f.t < 1 || f.t > f.horizon) throw ConfigError("project: need 1 <= t <= T");
  const RobustBudget budget{f.lambda, f.slack_b, f.expert_cum};
  const auto r = project(Vector::Constant(1, f.x_tilde), budget, ctx, spec, f.alpha);
  json j{{"x", r.x[0]}, {"mu", r.mu}, {"active", r.active}, {"constraint_value", r.constraint_value}};
  std::cout << j.dump() << "\n";
  return kExitOk;
}

struct AuditFlags {
  std::string dataset, params, out;
  std::vector<double> lambdas{1.4}, slacks{0.0};
  std::uint64_t seed = 1;
  bool theorem2 = true;
  int grid_n = 2001;
  int jobs = 0;
};

int cmd_audit(const std::vector<std::string>& args, const AuditFlags& f) {
  const auto dataset = dataset_from_json(read_text_file(f.dataset));
  std::optional<PolicyParams> params;
  if (!f.params.empty()) params = params_from_json(read_text_file(f.params));
  const RobustExpert robust;

  struct Row {
    std::string id, alg;
    CrReport rep;
  };
  std::vector<std::vector<Row>> rows(dataset.size());
  parallel_for(dataset.size(), f.jobs, [&](std::size_t i) {
    const Instance& inst = dataset[i];
    const std::string id = std::to_string(i);
    std::mt19937_64 rng(f.seed + 0x9e3779b97f4a7c15ULL * (i + 1));
    double spread = 1.0;
    for (const auto& y : inst.contexts) spread = std::max(spread, y.cwiseAbs().maxCoeff());
    std::normal_distribution<double> noise(0.0, spread);
    for (double lambda : f.lambdas) {
      for (double b : f.slacks) {
        std::vector<std::pair<std::string, Proposer>> sources;
        if (params) sources.emplace_back("ERL", policy_proposer(*params));
        sources.emplace_back("ERL-noise", [&](const ErlState& s, int) {
          Vector v(s.instance().dim());
          for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = noise(rng);
          return v;
        });
        sources.emplace_back("ERL-adversarial",
                             [](const ErlState& s, int t) { return Vector(-10.0 * s.instance().context(t)); });
        for (const auto& [name, prop] : sources) {
          const auto run = run_erl(inst, robust, lambda, b, prop);
          char label[96];
          std::snprintf(label, sizeof label, "%s(lambda=%g;B=%g)", name.c_str(), lambda, b);
          rows[i].push_back({id, label, audit_cr(run.trajectory.ledger.total(), run.expert.ledger.total(), lambda, b)});
        }
      }
    }
    if (f.theorem2 && inst.dim() == 1) {
      GridSpec grid;
      grid.n = f.grid_n;
      const double opt = offline_opt_dp(inst, grid).ledger.total();
      const double slack = 3.0 * dp_grid_spacing(inst, grid) * inst.horizon();
      auto rep = audit_cr(run_expert(inst, robust).ledger.total(), opt, robust_cr_bound(inst.alpha, inst.memory), slack);
      rows[i].push_back({id, "Robust-vs-OPT", rep});
    }
  });

  std::ostringstream csv;
  csv << cr_csv_header() << "\n";
  long checked = 0, violations = 0;
  for (const auto& per : rows)
    for (const auto& r : per) {
      ++checked;
      if (!r.rep.satisfied) ++violations;
      csv << cr_csv_row(r.id, r.alg, r.rep) << "\n";
    }
  if (!f.out.empty()) {
    write_text_file(f.out, csv.str());
    write_meta(meta_path_for(f.out), args, "audit",
               {{"lambdas", f.lambdas}, {"B", f.slacks}, {"seed", f.seed}, {"checked", checked},
                {"violations", violations}});
  }
  std::printf("audit: %ld checks, %ld violations\n", checked, violations);
  return violations == 0 ? kExitOk : kExitInvariant;
}

int run(const std::vector<std::string>& args);

int cmd_replay(const std::string& meta_path) {
  const json j = json::parse(read_text_file(meta_path), nullptr, false);
  if (j.is_discarded() || !j.contains("argv") || !j["argv"].is_array()) {
    throw ConfigError("replay: '" + meta_path + "' has no argv record");
  }
  const auto argv = j["argv"].get<std::vector<std::string>>();
  if (argv.size() < 2 || argv[1] == "replay") throw ConfigError("replay: recorded argv is not replayable");
  return run(argv);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Expert-robustified learning for online optimization with memory costs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "erl 1.0");

  auto add_jobs = [](CLI::App* sub, int& jobs) {
    sub->add_option("--jobs", jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  };

  // gen-data
  std::uint64_t gd_seed = 7;
  int gd_hours = 1440, gd_window = 25;
  std::string gd_regime = "summerlike", gd_trace_in, gd_trace_out, gd_out;
  double gd_alpha = 0.2;
  auto* gen = app.add_subcommand("gen-data", "Synthesize or ingest weather traces and build instances");
  gen->add_option("--seed", gd_seed, "Generator seed");
  gen->add_option("--hours", gd_hours, "Synthetic trace length in hours")->check(CLI::PositiveNumber);
  gen->add_option("--regime", gd_regime, "summerlike or winterlike");
  gen->add_option("--trace-in", gd_trace_in, "Ingest this trace CSV instead of synthesizing");
  gen->add_option("--trace-out", gd_trace_out, "Also write the weather trace CSV here");
  gen->add_option("--out", gd_out, "Dataset JSON output")->required();
  gen->add_option("--alpha", gd_alpha, "Hitting-cost sharpness");
  gen->add_option("--window", gd_window, "Sequence length (initial step + actions)");

  // train
  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Train a policy (end-to-end ERL or standalone)");
  train->add_option("--config", tf.config, "JSON config file");
  train->add_option("--lambda", tf.lambda, "Trust parameter used during training");
  train->add_option("--B", tf.slack_b, "Additive slack");
  train->add_option("--epochs", tf.epochs);
  train->add_option("--batch_size", tf.batch_size);
  train->add_option("--lr", tf.lr, "Base learning rate");
  train->add_option("--seed", tf.seed);
  train->add_option("--dataset_path", tf.dataset_path);
  train->add_option("--out_path", tf.out_path, "Params JSON output");
  train->add_option("--mode", tf.mode, "erl or standalone");
  train->add_option("--log", tf.log, "Training log CSV (default <out_path>.log.csv)");
  add_jobs(train, tf.jobs);

  // eval
  std::string ev_params, ev_dataset, ev_out = "bench.csv";
  double ev_lambda = 1.4, ev_b = 0.0;
  int ev_jobs = 0;
  auto* eval = app.add_subcommand("eval", "Evaluate trained params on a dataset");
  eval->add_option("--params", ev_params)->required();
  eval->add_option("--dataset", ev_dataset)->required();
  eval->add_option("--lambda", ev_lambda);
  eval->add_option("--B", ev_b);
  eval->add_option("--out", ev_out, "Bench CSV output");
  add_jobs(eval, ev_jobs);

  // bench
  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "Run all baselines and write bench.csv and histograms");
  bench->add_option("--dataset", bf.dataset)->required();
  bench->add_option("--erl-params", bf.erl_params, "End-to-end trained params (ERL rows)");
  bench->add_option("--rob-params", bf.rob_params, "Standalone trained params (ML, Switch, RoB rows)");
  bench->add_option("--lambda", bf.lambdas, "One or more trust parameters");
  bench->add_option("--B", bf.slack_b);
  bench->add_option("--switch-threshold", bf.switch_threshold);
  bench->add_option("--bin-width", bf.bin_width);
  bench->add_option("--grid-n", bf.grid_n, "OPT grid points");
  bench->add_option("--out-dir", bf.out_dir);
  add_jobs(bench, bf.jobs);

  // project
  ProjectFlags pf;
  auto* proj = app.add_subcommand("project", "Project one scalar ML action and print the result as JSON");
  proj->add_option("--x-tilde", pf.x_tilde)->required();
  proj->add_option("--y", pf.y)->required();
  proj->add_option("--cum-prev", pf.cum_prev, "Cost of x_{1:t-1}");
  proj->add_option("--expert-cum", pf.expert_cum, "Expert cost through step t");
  proj->add_option("--lambda", pf.lambda);
  proj->add_option("--B", pf.slack_b);
  proj->add_option("--alpha", pf.alpha);
  proj->add_option("--p", pf.p);
  proj->add_option("--t", pf.t);
  proj->add_option("--T", pf.horizon);
  proj->add_option("--history", pf.history, "x_{t-1} .. x_{t-q}");
  proj->add_option("--expert-window", pf.expert_window, "x^pi_t .. x^pi_{t-q}");
  proj->add_option("--coeffs", pf.coeffs, "Memory coefficients c_1 .. c_q");

  // audit
  AuditFlags af;
  auto* audit = app.add_subcommand("audit", "Re-verify the robustness and Robust-vs-OPT bounds on a dataset");
  audit->add_option("--dataset", af.dataset)->required();
  audit->add_option("--params", af.params, "Policy params to audit in addition to noise/adversarial proposals");
  audit->add_option("--lambda", af.lambdas);
  audit->add_option("--B", af.slacks);
  audit->add_option("--seed", af.seed);
  audit->add_option("--out", af.out, "CR report CSV");
  audit->add_option("--grid-n", af.grid_n);
  audit->add_flag("!--no-opt", af.theorem2, "Skip the Robust-vs-OPT check");
  add_jobs(audit, af.jobs);

  // replay
  std::string rp_meta;
  auto* replay = app.add_subcommand("replay", "Re-run a command from its run-metadata JSON");
  replay->add_option("meta", rp_meta)->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*gen) return cmd_gen_data(args, gd_seed, gd_hours, gd_regime, gd_trace_in, gd_trace_out, gd_out, gd_alpha, gd_window);
  if (*train) return cmd_train(args, tf);
  if (*eval) return cmd_eval(args, ev_params, ev_dataset, ev_lambda, ev_b, ev_out, ev_jobs);
  if (*bench) return cmd_bench(args, bf);
  if (*proj) return cmd_project(pf);
  if (*audit) return cmd_audit(args, af);
  if (*replay) return cmd_replay(rp_meta);
  return kExitConfig;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  try {
    return run(args);
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return kExitInvariant;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const UnsupportedError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace erl::cli
