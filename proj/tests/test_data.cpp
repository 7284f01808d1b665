#include <gtest/gtest.h>

#include <sstream>

#include "erl/data.hpp"
#include "erl/error.hpp"

namespace erl {
namespace {

TEST(Energy, WindPower) {
  const EnergyParams p;
  // 0.5 * 0.3 * 1.23 * 5e5 * 1000
  EXPECT_DOUBLE_EQ(wind_power(10.0, p), 9.225e7);
  EXPECT_DOUBLE_EQ(wind_power(20.0, p), 8.0 * wind_power(10.0, p));
  EXPECT_EQ(wind_power(0.0, p), 0.0);
  EXPECT_THROW(wind_power(-1.0, p), DomainError);
}

TEST(Energy, SolarPower) {
  const EnergyParams p;
  EXPECT_DOUBLE_EQ(solar_power(1.0, 25.0, p), 500.0);
  EXPECT_DOUBLE_EQ(solar_power(1.0, 35.0, p), 250.0);
  EXPECT_DOUBLE_EQ(solar_power(1.0, 5.0, p), 1000.0);
  EXPECT_EQ(solar_power(1.0, 60.0, p), 0.0);  // derating never goes negative
}

TEST(Energy, NetDemand) {
  const EnergyParams p;
  // 1e7 - 92250 * 8 - 250
  EXPECT_DOUBLE_EQ(net_demand({0, 2.0, 0.5, 25.0, 1e7}, p), 9261750.0);
  EXPECT_EQ(net_demand({0, 30.0, 1.0, 25.0, 1e7}, p), 0.0);
  EnergyParams bad;
  bad.kappa_wind = 1.5;
  EXPECT_THROW(bad.validate(), DomainError);
}

std::vector<WeatherRecord> ramp(int n) {
  std::vector<WeatherRecord> r;
  for (int h = 0; h < n; ++h) r.push_back({h, 0.0, 0.0, 25.0, 1000.0 * h});
  return r;
}

TEST(Windows, CountAndLayout) {
  const EnergyParams p;
  EXPECT_EQ(make_sequences(ramp(25), p).size(), 1u);
  EXPECT_THROW(make_sequences(ramp(24), p), DomainError);
  const auto seqs = make_sequences(ramp(1440), p);
  ASSERT_EQ(seqs.size(), 1416u);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_DOUBLE_EQ(seqs[k].initial[0][0], 1000.0 * k);
    ASSERT_EQ(seqs[k].horizon(), 24);
    EXPECT_DOUBLE_EQ(seqs[k].contexts[0][0], 1000.0 * (k + 1));
    EXPECT_DOUBLE_EQ(seqs[k].contexts[23][0], 1000.0 * (k + 24));
    EXPECT_DOUBLE_EQ(seqs[k].alpha, 0.2);
    // Consecutive windows overlap in 23 contexts.
    for (int t = 0; t < 23; ++t) EXPECT_EQ(seqs[k + 1].contexts[t][0], seqs[k].contexts[t + 1][0]);
  }
}

TEST(Synthetic, DeterministicAndBounded) {
  const auto a = synthetic_weather(7, 500, Regime::kWinterlike);
  const auto b = synthetic_weather(7, 500, Regime::kWinterlike);
  const auto c = synthetic_weather(8, 500, Regime::kWinterlike);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  ASSERT_EQ(a.size(), 500u);
  for (std::size_t h = 0; h < a.size(); ++h) {
    EXPECT_GE(a[h].wind_speed, 0.0);
    EXPECT_LE(a[h].wind_speed, 39.0);
    EXPECT_GE(a[h].solar_radiation, 0.0);
    EXPECT_LE(a[h].solar_radiation, 1.45);
    if (h > 0) EXPECT_GT(a[h].timestamp, a[h - 1].timestamp);
  }
}

TEST(Synthetic, RegimesDiffer) {
  const auto w = synthetic_weather(3, 24 * 30, Regime::kWinterlike);
  const auto s = synthetic_weather(3, 24 * 30, Regime::kSummerlike);
  double sw = 0, ss = 0, tw = 0, ts = 0;
  for (std::size_t h = 0; h < w.size(); ++h) {
    sw += w[h].solar_radiation;
    ss += s[h].solar_radiation;
    tw += w[h].temperature;
    ts += s[h].temperature;
  }
  EXPECT_GT(ss, sw);
  EXPECT_GT(ts, tw + 10.0 * static_cast<double>(w.size()));
  EXPECT_EQ(parse_regime("summerlike"), Regime::kSummerlike);
  EXPECT_EQ(regime_name(Regime::kWinterlike), "winterlike");
  EXPECT_THROW(parse_regime("autumn"), ConfigError);
}

TEST(TraceCsv, RoundTripIsExact) {
  const auto recs = synthetic_weather(11, 100, Regime::kSummerlike);
  std::stringstream ss;
  write_trace_csv(ss, recs);
  EXPECT_EQ(read_trace_csv(ss), recs);
}

TEST(TraceCsv, AcceptsBomAndCrlf) {
  std::stringstream ss("\xEF\xBB\xBFtimestamp,wind_speed_ms,solar_rad_kwm2,temp_c,base_demand_kw\r\n3,1.5,0.2,20,1000\r\n");
  const auto r = read_trace_csv(ss);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0], (WeatherRecord{3, 1.5, 0.2, 20.0, 1000.0}));
}

TEST(TraceCsv, RejectsMalformedInput) {
  const std::string head = trace_csv_header() + "\n";
  for (const std::string body : {"1,2,3,4\n", "1,2,3,4,5,6\n", "1,2,x,4,5\n", "1,2,3,4,\n", "1,-2,3,4,5\n",
                                 "1.5,2,3,4,5\n"}) {
    std::stringstream ss(head + body);
    EXPECT_THROW(read_trace_csv(ss), ConfigError) << body;
  }
  std::stringstream wrong("time,wind\n1,2\n");
  EXPECT_THROW(read_trace_csv(wrong), ConfigError);
  std::stringstream empty;
  EXPECT_THROW(read_trace_csv(empty), ConfigError);
}

}  // namespace
}  // namespace erl
