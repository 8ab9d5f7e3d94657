#pragma once

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace brw {

/// Every input of one CLI run. Zero in x_max, n, y_max, sigma, eta or
/// reaction selects the command's default.
struct ExperimentConfig {
  std::string command;
  std::string offspring = "don";
  std::string step = "rademacher";
  std::int64_t x_max = 0;
  double tol = 1e-12;
  std::int64_t iter_cap = 0;
  std::int64_t trees = 100'000;
  std::int64_t gen_cap = 10'000;
  std::int64_t n = 0;
  std::int64_t paths = 100'000;
  std::int64_t start_x = 30;
  double y = 1.0;
  double y_max = 0.0;
  double sigma = 0.0;
  double eta = 0.0;
  double dt = 1e-3;
  double reaction = 0.0;
  std::vector<std::int64_t> xs;
  std::vector<double> xs_scaled;
  std::vector<std::int64_t> heights;
  double eps = 0.5;
  std::int64_t cutoff = 1000;
  std::string mode = "ladder";
  std::uint64_t seed = 20240611;
  int threads = 1;
  std::string out_dir;
  std::string out;
  std::string format = "csv";
  bool strict = false;

  bool operator==(const ExperimentConfig&) const = default;
};

extern const std::vector<std::string> kCommands;

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Unknown keys and wrongly typed values throw BadNumeric.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Range checks and law resolution. Throws UnknownCommand, BadLawSpec or
/// BadNumeric.
void validate(const ExperimentConfig& c);

ExperimentConfig load_config(const std::string& path);

}  // namespace brw
