#pragma once

// Energy-scheduling workload: renewable conversion, net demand, sliding
// windows, and a synthetic weather generator with two seasonal regimes.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "erl/core.hpp"

namespace erl {

struct WeatherRecord {
  std::int64_t timestamp = 0;  // hour index
  double wind_speed = 0.0;     // m/s
  double solar_radiation = 0.0;  // kW/m^2
  double temperature = 25.0;   // deg C
  double base_demand = 0.0;    // kW

  void validate() const;
  bool operator==(const WeatherRecord&) const = default;
};

struct EnergyParams {
  double kappa_wind = 0.30;
  double rho = 1.23;           // kg/m^3
  double swept_area = 500000.0;  // m^2
  double kappa_solar = 0.10;
  double array_area = 10000.0;   // m^2
  double alpha = 0.2;

  void validate() const;
};

// 0.5 * kappa * rho * A * v^3.
double wind_power(double v, const EnergyParams& params);
// 0.5 * kappa * A * I * (1 - 0.05 (temp - 25)), never below 0.
double solar_power(double i_rad, double temp, const EnergyParams& params);
// max(P_s - P_wind - P_solar, 0).
double net_demand(const WeatherRecord& rec, const EnergyParams& params);

// One scalar instance per window of `window` records: x0 is hour 1's net
// demand, the contexts are hours 2..window.
std::vector<Instance> make_sequences(const std::vector<WeatherRecord>& records, const EnergyParams& params,
                                     int window = 25);

enum class Regime { kSummerlike, kWinterlike };
Regime parse_regime(const std::string& name);
std::string regime_name(Regime r);

// Diurnal sinusoid plus AR(1) noise per field, deterministic per seed.
std::vector<WeatherRecord> synthetic_weather(std::uint64_t seed, int n_hours, Regime regime);

std::string trace_csv_header();
void write_trace_csv(std::ostream& out, const std::vector<WeatherRecord>& records);
// Throws ConfigError on a bad header, missing fields or unparsable numbers.
std::vector<WeatherRecord> read_trace_csv(std::istream& in);

}  // namespace erl
