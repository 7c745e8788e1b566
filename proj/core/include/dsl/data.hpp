#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dsl/param_vector.hpp"
#include "dsl/rng.hpp"

namespace dsl {

// Labelled feature matrix, row-major (size() x dim()).
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t dim, int num_classes) : dim_(dim), num_classes_(num_classes) {}

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::size_t dim() const { return dim_; }
  int num_classes() const { return num_classes_; }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& features() const { return features_; }

  void add(std::span<const double> x, int label);
  void reserve(std::size_t n);

  // Rows picked by index, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> class_histogram() const;

  // Throws ConfigError on a bad label or non-finite feature.
  void validate() const;

 private:
  std::size_t dim_ = 0;
  int num_classes_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
};

struct GlobalDataset {
  Dataset train_part;  // shared with every worker for training
  Dataset score_part;  // fair-value scoring and aggregate screening
};

enum class PartitionMode { dirichlet, shards, iid };

struct PartitionSpec {
  int num_workers = 1;
  double dirichlet_alpha = 1.0;  // label-skew concentration
  double global_fraction = 0.01;
  double global_split = 0.5;  // share of the global set used for training
  PartitionMode mode = PartitionMode::dirichlet;
  int shards_per_worker = 2;  // shards mode only

  void validate() const;
};

// Result of partitioning, with the source row indices of every shard so the
// partition can be audited against the input.
struct Partition {
  std::vector<Dataset> locals;
  GlobalDataset global;
  std::vector<std::vector<std::size_t>> local_indices;
  std::vector<std::size_t> global_train_indices;
  std::vector<std::size_t> global_score_indices;
};

// Gaussian mixture: class means on a sphere of radius `sep`, identity
// covariance, labels balanced up to rounding.
Dataset gen_synthetic(std::size_t n, std::size_t d_in, int num_classes, double sep,
                      RngStream& rng);

// Removes round(global_fraction * n) samples uniformly at random for the
// global set, then spreads the rest over the workers. Dirichlet mode draws a
// Dir(alpha * 1_U) proportion vector per class. A draw that leaves a worker
// empty is repeated (up to 100 attempts) before ConfigError.
Partition partition_noniid(const Dataset& ds, const PartitionSpec& spec, std::uint64_t seed);

// Uniform random split: (kept, held_out) with round(fraction * n) held out.
std::pair<Dataset, Dataset> split_holdout(const Dataset& ds, double fraction, RngStream& rng);

// local followed by global.train_part.
Dataset merge_global_train(const Dataset& local, const GlobalDataset& global);

struct WeightDivergence {
  double value = 0.0;
  bool degenerate = false;  // ||w_global|| fell below the epsilon guard
};

// Mean over workers of ||w_i - w_g|| / max(||w_g||, 1e-12).
WeightDivergence weight_divergence(std::span<const ParamVector> local_models,
                                   const ParamVector& global_model);

// CSV with header f0,...,f{d-1},label. Throws ConfigError with the line
// number of the first malformed row.
Dataset read_csv_dataset(const std::filesystem::path& path, int num_classes = 0);
void write_csv_dataset(const Dataset& ds, const std::filesystem::path& path);

// Per-feature standardization using the statistics of `reference`.
void standardize(std::span<Dataset*> datasets, const Dataset& reference);

}  // namespace dsl
