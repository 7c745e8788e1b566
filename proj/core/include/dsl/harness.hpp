#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsl/config.hpp"
#include "dsl/data.hpp"

namespace dsl {

// Everything a run trains and evaluates on.
struct PreparedData {
  Dataset test;  // held out before partitioning
  GlobalDataset global;
  std::vector<std::shared_ptr<const Dataset>> train_sets;  // one per worker
};

// Generates (or loads) the dataset, reserves the test split, partitions the
// rest and, with share_global, appends the global train part to every
// worker's local set. Deterministic in cfg.seed.
PreparedData prepare_data(const ExperimentConfig& cfg);

struct RoundMetrics {
  int round = 0;
  double test_accuracy = 0.0;
  double test_loss = 0.0;
  double global_score_loss = 0.0;
  double mean_local_f_best = 0.0;
  double weight_divergence = 0.0;
  std::uint64_t uplink_scalars = 0;
  std::uint64_t uplink_vectors = 0;
  std::uint64_t ota_uses = 0;
  int s_effective = 0;
  std::uint64_t rejected = 0;
};

struct RunOptions {
  bool write_files = true;      // metrics.csv + manifest.json in cfg.output_dir
  bool record_f_best = false;   // keep the per-round F^p of every worker
};

struct RunResult {
  std::vector<RoundMetrics> metrics;
  std::vector<std::vector<double>> f_best_trace;  // [round][worker]
  std::vector<int> byzantine_ids;
  std::vector<char> failed_nodes;
  double tau_used = 0.0;
  bool aborted = false;
  std::string error;  // set when aborted
};

extern const char* const kMetricsHeader;

// Formats one metrics row (floats with 9 significant digits).
std::string format_metrics_row(const RoundMetrics& m, Algorithm algo, std::uint64_t seed);

// Screening threshold for an "auto" policy: 3x the largest deviation between
// an accepted aggregate's score and the mean report during the first five
// rounds of the same run without attacks, without screening, and with s_t
// held at its largest scheduled value.
double calibrate_tau(const ExperimentConfig& cfg);

// Runs one experiment. A numeric failure mid-run keeps the rows already
// written and rethrows as NumericError.
RunResult run(const ExperimentConfig& cfg, const RunOptions& options = {});

struct SweepVariant {
  std::string name;
  nlohmann::json patch;  // merged into the base config
};

// Overrides file: either a JSON array of patches (optionally {"name", "patch"})
// or an object mapping dotted keys to value lists, expanded as a grid.
std::vector<SweepVariant> parse_overrides(const nlohmann::json& overrides);

struct SweepRow {
  std::string variant;
  std::optional<std::uint64_t> seed;  // nullopt: median row
  double final_test_acc = 0.0;
  double final_test_loss = 0.0;
  std::uint64_t uplink_scalars = 0;
  std::uint64_t uplink_vectors = 0;
  std::uint64_t rejected = 0;
  std::string error;
};

// Runs every variant for every seed, plus a median row per variant when more
// than one seed is given. Sub-run errors become rows with `error` set.
// Writes <out_dir>/summary.csv and per-run directories when out_dir is
// non-empty.
std::vector<SweepRow> sweep(const nlohmann::json& base, const std::vector<SweepVariant>& variants,
                            std::uint64_t seed_first, std::uint64_t seed_last,
                            const std::filesystem::path& out_dir);

void write_sweep_summary(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace dsl
