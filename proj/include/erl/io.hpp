#pragma once

// File formats: instances and datasets, policy params, run configs, and
// run metadata. JSON throughout; malformed input raises ConfigError.

#include <cstdint>
#include <string>
#include <vector>

#include "erl/core.hpp"
#include "erl/policy.hpp"
#include "erl/trainer.hpp"

namespace erl {

inline constexpr int kParamsFormatVersion = 1;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

std::string dataset_to_json(const std::vector<Instance>& dataset);
std::vector<Instance> dataset_from_json(const std::string& text);

std::string params_to_json(const PolicyParams& params);
// Validates version, shapes and finiteness.
PolicyParams params_from_json(const std::string& text);

// 64-bit FNV-1a of a byte string, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

// Training run file: {lambda, B, epochs, batch_size, lr, seed, dataset_path, out_path, ...}.
struct RunConfig {
  TrainConfig train;
  std::string dataset_path;
  std::string out_path;
};
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace erl
