#include "erl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "erl/error.hpp"

namespace erl {

void WeatherRecord::validate() const {
  if (!std::isfinite(wind_speed) || wind_speed < 0.0) throw DomainError("weather: wind speed must be >= 0");
  if (!std::isfinite(solar_radiation) || solar_radiation < 0.0) {
    throw DomainError("weather: solar radiation must be >= 0");
  }
  if (!std::isfinite(temperature) || !std::isfinite(base_demand)) throw DomainError("weather: non-finite field");
}

void EnergyParams::validate() const {
  auto frac = [](double f) { return f > 0.0 && f <= 1.0; };
  if (!frac(kappa_wind) || !frac(kappa_solar)) throw DomainError("energy params: efficiencies must be in (0, 1]");
  if (!(rho > 0.0) || !(swept_area > 0.0) || !(array_area > 0.0)) {
    throw DomainError("energy params: density and areas must be > 0");
  }
  if (!(alpha > 0.0)) throw DomainError("energy params: alpha must be > 0");
}

double wind_power(double v, const EnergyParams& params) {
  if (!(v >= 0.0)) throw DomainError("wind_power: negative wind speed");
  return 0.5 * params.kappa_wind * params.rho * params.swept_area * v * v * v;
}

double solar_power(double i_rad, double temp, const EnergyParams& params) {
  const double p = 0.5 * params.kappa_solar * params.array_area * i_rad * (1.0 - 0.05 * (temp - 25.0));
  return std::max(p, 0.0);
}

double net_demand(const WeatherRecord& rec, const EnergyParams& params) {
  const double renew = wind_power(rec.wind_speed, params) + solar_power(rec.solar_radiation, rec.temperature, params);
  return std::max(rec.base_demand - renew, 0.0);
}

std::vector<Instance> make_sequences(const std::vector<WeatherRecord>& records, const EnergyParams& params,
                                     int window) {
  params.validate();
  if (window < 2) throw DomainError("make_sequences: window must be >= 2");
  if (static_cast<int>(records.size()) < window) {
    throw DomainError("make_sequences: need at least " + std::to_string(window) + " records, got " +
                      std::to_string(records.size()));
  }
  std::vector<double> y(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].validate();
    y[i] = net_demand(records[i], params);
  }
  std::vector<Instance> out;
  const std::size_t n = records.size() - static_cast<std::size_t>(window) + 1;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> ctx(y.begin() + static_cast<std::ptrdiff_t>(s + 1),
                            y.begin() + static_cast<std::ptrdiff_t>(s + static_cast<std::size_t>(window)));
    out.push_back(Instance::scalar(y[s], ctx, params.alpha));
  }
  return out;
}

Regime parse_regime(const std::string& name) {
  if (name == "summerlike") return Regime::kSummerlike;
  if (name == "winterlike") return Regime::kWinterlike;
  throw ConfigError("unknown regime '" + name + "' (expected summerlike or winterlike)");
}

std::string regime_name(Regime r) { return r == Regime::kSummerlike ? "summerlike" : "winterlike"; }

namespace {

struct RegimeShape {
  double wind_mean, wind_amp, wind_sd;
  double solar_peak;
  double temp_mean, temp_amp, temp_sd;
  double demand_mean, demand_amp, demand_sd;
};

RegimeShape shape_of(Regime r) {
  // Winter: windier, weak sun, cold. Summer: calm, strong sun, hot, higher load.
  if (r == Regime::kWinterlike) return {7.0, 1.5, 1.2, 0.55, 3.0, 4.0, 1.5, 4.5e7, 0.8e7, 0.25e7};
  return {5.0, 1.0, 1.0, 1.0, 27.0, 6.0, 1.5, 5.0e7, 1.0e7, 0.25e7};
}

}  // namespace

std::vector<WeatherRecord> synthetic_weather(std::uint64_t seed, int n_hours, Regime regime) {
  if (n_hours < 0) throw DomainError("synthetic_weather: n_hours must be >= 0");
  const RegimeShape s = shape_of(regime);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // AR(1) with unit stationary variance.
  const double phi = 0.8, innov = std::sqrt(1.0 - phi * phi);
  double nw = 0.0, ns = 0.0, nt = 0.0, nd = 0.0;
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<WeatherRecord> out;
  out.reserve(static_cast<std::size_t>(n_hours));
  for (int h = 0; h < n_hours; ++h) {
    nw = phi * nw + innov * gauss(rng);
    ns = phi * ns + innov * gauss(rng);
    nt = phi * nt + innov * gauss(rng);
    nd = phi * nd + innov * gauss(rng);
    const double hour = h % 24;
    const double day = std::sin(two_pi * (hour - 9.0) / 24.0);  // peaks mid-afternoon
    const double sun = std::max(0.0, std::sin(std::numbers::pi * (hour - 6.0) / 12.0));  // 6h..18h

    WeatherRecord r;
    r.timestamp = h;
    r.wind_speed = std::clamp(s.wind_mean + s.wind_amp * day + s.wind_sd * nw, 0.0, 39.0);
    r.solar_radiation = std::clamp(s.solar_peak * sun * (1.0 + 0.15 * ns), 0.0, 1.45);
    r.temperature = s.temp_mean + s.temp_amp * day + s.temp_sd * nt;
    r.base_demand = std::max(0.0, s.demand_mean + s.demand_amp * day + s.demand_sd * nd);
    out.push_back(r);
  }
  return out;
}

std::string trace_csv_header() { return "timestamp,wind_speed_ms,solar_rad_kwm2,temp_c,base_demand_kw"; }

void write_trace_csv(std::ostream& out, const std::vector<WeatherRecord>& records) {
  out << trace_csv_header() << '\n';
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g", static_cast<long long>(r.timestamp), r.wind_speed,
                  r.solar_radiation, r.temperature, r.base_demand);
    out << buf << '\n';
  }
}

namespace {

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <typename T>
T parse_field(const std::string& raw, int line, const char* name) {
  const std::string s = trim(raw);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("trace CSV line " + std::to_string(line) + ": bad or missing " + name + " '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<WeatherRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trace CSV: empty input");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (trim(line) != trace_csv_header()) throw ConfigError("trace CSV: unexpected header '" + trim(line) + "'");

  std::vector<WeatherRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 5) {
      throw ConfigError("trace CSV line " + std::to_string(lineno) + ": expected 5 fields, got " +
                        std::to_string(f.size()));
    }
    WeatherRecord r;
    r.timestamp = parse_field<std::int64_t>(f[0], lineno, "timestamp");
    r.wind_speed = parse_field<double>(f[1], lineno, "wind_speed_ms");
    r.solar_radiation = parse_field<double>(f[2], lineno, "solar_rad_kwm2");
    r.temperature = parse_field<double>(f[3], lineno, "temp_c");
    r.base_demand = parse_field<double>(f[4], lineno, "base_demand_kw");
    try {
      r.validate();
    } catch (const DomainError& e) {
      throw ConfigError("trace CSV line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace erl
