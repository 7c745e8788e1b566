#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dsl/channel.hpp"
#include "dsl/data.hpp"
#include "dsl/model.hpp"
#include "dsl/optimizer.hpp"
#include "dsl/robustness.hpp"
#include "dsl/schedule.hpp"

namespace dsl {

enum class Algorithm { dsl, fl, pso };

struct DataConfig {
  std::string csv_path;  // empty: synthetic Gaussian mixture
  std::size_t n = 12500;
  double sep = 3.0;
  double test_fraction = 0.2;
  bool share_global = true;  // train on local data plus the global train part
  bool standardize = false;
  std::size_t batch_size = 32;
  PartitionSpec partition;
};

struct OptimizerConfig {
  VelocityRule velocity_rule = VelocityRule::bi_displacement;
  CoeffDraw coeff_draw = CoeffDraw::per_coordinate;
  double init_scale = 0.05;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::dsl;
  int rounds = 200;
  int num_workers = 50;
  ModelSpec model{ModelKind::mlp, 20, 16, 5};
  DataConfig data;
  HyperSchedule schedules;
  OptimizerConfig optimizer;
  ChannelModel channel;
  CensorPolicy censoring;
  AttackSpec attacks;
  ScreeningPolicy screening;
  FailureSpec failures;
  std::uint64_t seed = 1;
  std::string output_dir;

  // Copies rounds/num_workers into the nested specs, then checks every
  // range. Throws ConfigError naming the offending key.
  void validate() const;
  // Sets the derived nested fields (schedules.rounds_total, partition size).
  void resolve();
};

// The defaults mirror the reference scale: 50 workers, 200 rounds, 5 classes,
// 20 features, 16 hidden units, 1% global data.
ExperimentConfig default_config();

// Strict parse: unknown keys and wrong types are ConfigErrors. Missing keys
// keep their defaults. The result is resolved and validated.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json load_config_json(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& cfg);

const char* to_string(Algorithm a);

}  // namespace dsl
