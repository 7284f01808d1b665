#include "erl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace erl {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

namespace {

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

// Wraps nlohmann's type errors so every bad file surfaces as a ConfigError.
template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

json p_to_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

double p_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfNorm;
    throw ConfigError("norm order must be a number or \"inf\"");
  }
  return j.get<double>();
}

json vec_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vec_from_json(const json& j) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array()) throw ConfigError("expected a number or an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json mat_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Matrix mat_from_json(const json& j) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ConfigError("expected a matrix as an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 1);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = vec_from_json(j[static_cast<std::size_t>(r)]);
    if (row.size() != cols) throw ConfigError("ragged matrix rows");
    m.row(r) = row.transpose();
  }
  return m;
}

json instance_json(const Instance& inst) {
  json j;
  if (inst.memory.q() == 1) {
    j["x0"] = vec_to_json(inst.initial.front());
  } else {
    json x0 = json::array();
    for (const auto& x : inst.initial) x0.push_back(vec_to_json(x));
    j["x0"] = x0;
  }
  json ctx = json::array();
  for (const auto& y : inst.contexts) ctx.push_back(vec_to_json(y));
  j["contexts"] = ctx;
  j["alpha"] = inst.alpha;
  j["p"] = p_to_json(inst.p());
  json coeffs = json::array();
  for (const auto& c : inst.memory.coeffs()) coeffs.push_back(mat_to_json(c));
  j["memory"] = {{"q", inst.memory.q()}, {"coeffs", coeffs}};
  return j;
}

Instance instance_from(const json& j) {
  return guarded("instance", [&] {
    Instance inst;
    const double p = j.contains("p") ? p_from_json(j.at("p")) : 2.0;
    inst.alpha = j.at("alpha").get<double>();
    std::vector<Matrix> coeffs;
    if (j.contains("memory")) {
      const auto& m = j.at("memory");
      for (const auto& c : m.at("coeffs")) coeffs.push_back(mat_from_json(c));
      if (m.contains("q") && m.at("q").get<int>() != static_cast<int>(coeffs.size())) {
        throw ConfigError("instance: memory.q does not match the number of coefficients");
      }
    }
    for (const auto& y : j.at("contexts")) inst.contexts.push_back(vec_from_json(y));
    if (inst.contexts.empty()) throw ConfigError("instance: no contexts");
    const auto d = inst.contexts.front().size();
    if (coeffs.empty()) coeffs.push_back(Matrix::Identity(d, d));
    inst.memory = MemorySpec(std::move(coeffs), p);
    const auto q = static_cast<std::size_t>(inst.memory.q());
    const json& x0 = j.at("x0");
    // Single action (one vector or scalar): all q initial actions equal it.
    const bool nested = x0.is_array() && !x0.empty() && x0[0].is_array();
    if (q > 1 && nested) {
      for (const auto& x : x0) inst.initial.push_back(vec_from_json(x));
    } else if (nested && x0.size() == 1) {
      inst.initial.push_back(vec_from_json(x0[0]));
    } else {
      inst.initial.assign(q, vec_from_json(x0));
    }
    try {
      inst.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    return inst;
  });
}

}  // namespace

std::string instance_to_json(const Instance& inst) { return instance_json(inst).dump(); }

Instance instance_from_json(const std::string& text) { return instance_from(parse(text, "instance")); }

std::string dataset_to_json(const std::vector<Instance>& dataset) {
  json arr = json::array();
  for (const auto& inst : dataset) arr.push_back(instance_json(inst));
  return json{{"instances", arr}}.dump();
}

std::vector<Instance> dataset_from_json(const std::string& text) {
  const json j = parse(text, "dataset");
  return guarded("dataset", [&] {
    std::vector<Instance> out;
    const json& arr = j.is_array() ? j : j.at("instances");
    out.reserve(arr.size());
    for (const auto& inst : arr) out.push_back(instance_from(inst));
    return out;
  });
}

std::string params_to_json(const PolicyParams& params) {
  const auto& s = params.shape;
  json j;
  j["format"] = "erl-policy";
  j["version"] = kParamsFormatVersion;
  j["shape"] = {{"dim", s.dim}, {"q", s.q}, {"hidden1", s.hidden1}, {"hidden2", s.hidden2}};
  j["seed"] = params.seed;
  j["normalization"] = {{"in_mean", vec_to_json(params.norm.in_mean)},
                        {"in_scale", vec_to_json(params.norm.in_scale)},
                        {"out_mean", vec_to_json(params.norm.out_mean)},
                        {"out_scale", vec_to_json(params.norm.out_scale)}};
  j["theta"] = vec_to_json(params.flatten());
  return j.dump(1);
}

PolicyParams params_from_json(const std::string& text) {
  const json j = parse(text, "params");
  return guarded("params", [&] {
    if (j.value("format", std::string()) != "erl-policy") throw ConfigError("params: not a policy file");
    const int version = j.at("version").get<int>();
    if (version != kParamsFormatVersion) {
      throw ConfigError("params: unsupported version " + std::to_string(version));
    }
    const auto& sj = j.at("shape");
    PolicyShape shape{sj.at("dim").get<int>(), sj.at("q").get<int>(), sj.at("hidden1").get<int>(),
                      sj.at("hidden2").get<int>()};
    PolicyParams p;
    try {
      p = PolicyParams::init(shape, j.at("seed").get<std::uint64_t>());
    } catch (const Error& e) {
      throw ConfigError(std::string("params: ") + e.what());
    }
    const auto& nj = j.at("normalization");
    p.norm.in_mean = vec_from_json(nj.at("in_mean"));
    p.norm.in_scale = vec_from_json(nj.at("in_scale"));
    p.norm.out_mean = vec_from_json(nj.at("out_mean"));
    p.norm.out_scale = vec_from_json(nj.at("out_scale"));
    const Vector theta = vec_from_json(j.at("theta"));
    if (!theta.allFinite() || !p.norm.in_mean.allFinite() || !p.norm.in_scale.allFinite() ||
        !p.norm.out_mean.allFinite() || !p.norm.out_scale.allFinite()) {
      throw ConfigError("params: non-finite values");
    }
    try {
      p.unflatten(theta);
      p.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("params: ") + e.what());
    }
    return p;
  });
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig run_config_from_json(const std::string& text) {
  const json j = parse(text, "config");
  return guarded("config", [&] {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    static const char* known[] = {"lambda", "B",      "epochs",       "batch_size", "lr",          "seed",
                                  "dataset_path", "out_path", "momentum", "val_frac", "hidden", "jobs",
                                  "lr_halve_at"};
    for (const auto& [key, _] : j.items()) {
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) throw ConfigError("config: unknown key '" + key + "'");
    }
    RunConfig c;
    auto& t = c.train;
    t.lambda = j.value("lambda", t.lambda);
    t.slack_b = j.value("B", t.slack_b);
    t.epochs = j.value("epochs", t.epochs);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.lr = j.value("lr", t.lr);
    t.seed = j.value("seed", t.seed);
    t.momentum = j.value("momentum", t.momentum);
    t.val_frac = j.value("val_frac", t.val_frac);
    t.hidden = j.value("hidden", t.hidden);
    t.jobs = j.value("jobs", t.jobs);
    if (j.contains("lr_halve_at")) t.lr_halve_at = j.at("lr_halve_at").get<std::vector<int>>();
    c.dataset_path = j.value("dataset_path", std::string());
    c.out_path = j.value("out_path", std::string());
    return c;
  });
}

std::string run_config_to_json(const RunConfig& cfg) {
  const auto& t = cfg.train;
  json j{{"lambda", t.lambda},     {"B", t.slack_b},           {"epochs", t.epochs},
         {"batch_size", t.batch_size}, {"lr", t.lr},            {"seed", t.seed},
         {"momentum", t.momentum}, {"val_frac", t.val_frac},   {"hidden", t.hidden},
         {"lr_halve_at", t.lr_halve_at}, {"dataset_path", cfg.dataset_path}, {"out_path", cfg.out_path}};
  return j.dump(1);
}

}  // namespace erl
