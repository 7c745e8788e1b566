#include "dsl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "dsl/error.hpp"

namespace dsl {

void Dataset::add(std::span<const double> x, int label) {
  if (x.size() != dim_) {
    throw DimensionError("Dataset::add: feature row has " + std::to_string(x.size()) +
                         " entries, expected " + std::to_string(dim_));
  }
  features_.insert(features_.end(), x.begin(), x.end());
  labels_.push_back(label);
}

void Dataset::reserve(std::size_t n) {
  features_.reserve(n * dim_);
  labels_.reserve(n);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out(dim_, num_classes_);
  out.reserve(indices.size());
  for (std::size_t i : indices) out.add(row(i), labels_[i]);
  return out;
}

std::vector<std::size_t> Dataset::class_histogram() const {
  std::vector<std::size_t> h(static_cast<std::size_t>(num_classes_), 0);
  for (int y : labels_) ++h[static_cast<std::size_t>(y)];
  return h;
}

void Dataset::validate() const {
  if (num_classes_ < 1) throw ConfigError("dataset: number of classes must be >= 1");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= num_classes_) {
      throw ConfigError("dataset: label " + std::to_string(labels_[i]) + " at row " +
                        std::to_string(i) + " outside [0, " + std::to_string(num_classes_) +
                        ")");
    }
  }
  for (std::size_t k = 0; k < features_.size(); ++k) {
    if (!std::isfinite(features_[k])) {
      throw ConfigError("dataset: non-finite feature in row " + std::to_string(k / dim_));
    }
  }
}

void PartitionSpec::validate() const {
  if (num_workers < 1) throw ConfigError("num_workers: must be >= 1");
  if (!(dirichlet_alpha > 0.0)) throw ConfigError("data.dirichlet_alpha: must be > 0");
  if (!(global_fraction > 0.0 && global_fraction <= 0.1))
    throw ConfigError("data.global_fraction: must be in (0, 0.1]");
  if (!(global_split > 0.0 && global_split < 1.0))
    throw ConfigError("data.global_split: must be in (0, 1)");
  if (mode == PartitionMode::shards && shards_per_worker < 1)
    throw ConfigError("data.shards_per_worker: must be >= 1");
}

Dataset gen_synthetic(std::size_t n, std::size_t d_in, int num_classes, double sep,
                      RngStream& rng) {
  if (num_classes < 1) throw ConfigError("data.classes: must be >= 1");
  if (n < static_cast<std::size_t>(num_classes))
    throw ConfigError("data.n: must be >= number of classes");
  if (d_in < 1) throw ConfigError("model.d_in: must be >= 1");
  if (!(sep > 0.0)) throw ConfigError("data.sep: must be > 0");

  const auto C = static_cast<std::size_t>(num_classes);
  std::vector<double> means(C * d_in);
  for (std::size_t c = 0; c < C; ++c) {
    double norm2 = 0.0;
    for (std::size_t j = 0; j < d_in; ++j) {
      means[c * d_in + j] = rng.normal();
      norm2 += means[c * d_in + j] * means[c * d_in + j];
    }
    const double scale = sep / std::sqrt(norm2);
    for (std::size_t j = 0; j < d_in; ++j) means[c * d_in + j] *= scale;
  }

  Dataset ds(d_in, num_classes);
  ds.reserve(n);
  std::vector<double> x(d_in);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % C;
    for (std::size_t j = 0; j < d_in; ++j) x[j] = means[c * d_in + j] + rng.normal();
    ds.add(x, static_cast<int>(c));
  }
  return ds;
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  return idx;
}

std::vector<std::vector<std::size_t>> assign_dirichlet(
    const Dataset& ds, std::span<const std::size_t> pool, const PartitionSpec& spec,
    RngStream& rng) {
  const auto U = static_cast<std::size_t>(spec.num_workers);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.num_classes()));
  for (std::size_t i : pool) by_class[static_cast<std::size_t>(ds.label(i))].push_back(i);

  std::vector<std::vector<std::size_t>> shards(U);
  std::vector<double> p(U);
  for (auto& members : by_class) {
    if (members.empty()) continue;
    double total = 0.0;
    for (std::size_t u = 0; u < U; ++u) {
      p[u] = rng.gamma(spec.dirichlet_alpha);
      total += p[u];
    }
    if (!(total > 0.0)) {
      // All gamma draws underflowed; put the class on one worker.
      std::fill(p.begin(), p.end(), 0.0);
      p[rng.index(U)] = 1.0;
      total = 1.0;
    }
    const std::size_t nc = members.size();
    double cum = 0.0;
    std::size_t start = 0;
    for (std::size_t u = 0; u < U; ++u) {
      cum += p[u] / total;
      std::size_t stop = u + 1 == U ? nc
                                    : std::min(nc, static_cast<std::size_t>(
                                                       std::llround(cum * static_cast<double>(nc))));
      stop = std::max(stop, start);
      shards[u].insert(shards[u].end(), members.begin() + static_cast<std::ptrdiff_t>(start),
                       members.begin() + static_cast<std::ptrdiff_t>(stop));
      start = stop;
    }
  }
  return shards;
}

std::vector<std::vector<std::size_t>> assign_shards(const Dataset& ds,
                                                    std::span<const std::size_t> pool,
                                                    const PartitionSpec& spec, RngStream& rng) {
  const auto U = static_cast<std::size_t>(spec.num_workers);
  std::vector<std::size_t> sorted(pool.begin(), pool.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](std::size_t a, std::size_t b) { return ds.label(a) < ds.label(b); });
  const std::size_t num_shards = U * static_cast<std::size_t>(spec.shards_per_worker);
  std::vector<std::size_t> order(num_shards);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng.engine());

  std::vector<std::vector<std::size_t>> shards(U);
  const std::size_t n = sorted.size();
  for (std::size_t k = 0; k < num_shards; ++k) {
    const std::size_t s = order[k];
    const std::size_t lo = s * n / num_shards;
    const std::size_t hi = (s + 1) * n / num_shards;
    auto& dst = shards[k % U];
    dst.insert(dst.end(), sorted.begin() + static_cast<std::ptrdiff_t>(lo),
               sorted.begin() + static_cast<std::ptrdiff_t>(hi));
  }
  return shards;
}

std::vector<std::vector<std::size_t>> assign_iid(std::span<const std::size_t> pool,
                                                 const PartitionSpec& spec, RngStream& rng) {
  const auto U = static_cast<std::size_t>(spec.num_workers);
  std::vector<std::size_t> order(pool.begin(), pool.end());
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::vector<std::vector<std::size_t>> shards(U);
  for (std::size_t k = 0; k < order.size(); ++k) shards[k % U].push_back(order[k]);
  return shards;
}

}  // namespace

Partition partition_noniid(const Dataset& ds, const PartitionSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = ds.size();
  const auto n_global = static_cast<std::size_t>(
      std::llround(spec.global_fraction * static_cast<double>(n)));
  const auto n_global_train = static_cast<std::size_t>(
      std::llround(spec.global_split * static_cast<double>(n_global)));
  if (n < n_global + static_cast<std::size_t>(spec.num_workers)) {
    throw ConfigError("data.n: too few samples for " + std::to_string(spec.num_workers) +
                      " workers after removing the global set");
  }

  RngStream global_rng(seed, "partition_global");
  const std::vector<std::size_t> order = shuffled_indices(n, global_rng);

  Partition part;
  part.global_train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_global_train));
  part.global_score_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_global_train),
                                   order.begin() + static_cast<std::ptrdiff_t>(n_global));
  const std::span<const std::size_t> pool(order.data() + n_global, n - n_global);

  constexpr int kMaxAttempts = 100;
  bool ok = false;
  for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
    RngStream rng(seed, "partition_workers", static_cast<std::uint64_t>(attempt));
    switch (spec.mode) {
      case PartitionMode::dirichlet:
        part.local_indices = assign_dirichlet(ds, pool, spec, rng);
        break;
      case PartitionMode::shards:
        part.local_indices = assign_shards(ds, pool, spec, rng);
        break;
      case PartitionMode::iid:
        part.local_indices = assign_iid(pool, spec, rng);
        break;
    }
    ok = std::none_of(part.local_indices.begin(), part.local_indices.end(),
                      [](const auto& s) { return s.empty(); });
  }
  if (!ok) {
    throw ConfigError("data.dirichlet_alpha: a worker received no samples in " +
                      std::to_string(kMaxAttempts) + " partition attempts");
  }

  part.locals.reserve(part.local_indices.size());
  for (const auto& idx : part.local_indices) part.locals.push_back(ds.subset(idx));
  part.global.train_part = ds.subset(part.global_train_indices);
  part.global.score_part = ds.subset(part.global_score_indices);
  return part;
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& ds, double fraction, RngStream& rng) {
  const std::vector<std::size_t> order = shuffled_indices(ds.size(), rng);
  const auto n_out =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
  std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(n_out), order.end());
  std::vector<std::size_t> held(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_out));
  // Keep source order inside each part so shards do not depend on the shuffle twice.
  std::sort(kept.begin(), kept.end());
  std::sort(held.begin(), held.end());
  return {ds.subset(kept), ds.subset(held)};
}

Dataset merge_global_train(const Dataset& local, const GlobalDataset& global) {
  const Dataset& extra = global.train_part;
  if (!extra.empty() && extra.dim() != local.dim()) {
    throw DimensionError("merge_global_train: local has " + std::to_string(local.dim()) +
                         " features, global train part has " + std::to_string(extra.dim()));
  }
  Dataset out = local;
  out.reserve(local.size() + extra.size());
  for (std::size_t i = 0; i < extra.size(); ++i) out.add(extra.row(i), extra.label(i));
  return out;
}

WeightDivergence weight_divergence(std::span<const ParamVector> local_models,
                                   const ParamVector& global_model) {
  constexpr double kEps = 1e-12;
  WeightDivergence out;
  if (local_models.empty()) return out;
  const double gnorm = global_model.norm();
  out.degenerate = gnorm < kEps;
  const double denom = std::max(gnorm, kEps);
  double sum = 0.0;
  for (const auto& w : local_models) sum += distance(w, global_model) / denom;
  out.value = sum / static_cast<double>(local_models.size());
  return out;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset read_csv_dataset(const std::filesystem::path& path, int num_classes) {
  std::ifstream in(path);
  if (!in) throw ConfigError("data.csv_path: cannot open " + path.string());

  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
  const auto header = split_commas(line);
  if (header.size() < 2 || trim(header.back()) != "label") {
    throw ConfigError(path.string() + ":1: header must be f0,...,f{d-1},label");
  }
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (trim(header[j]) != "f" + std::to_string(j)) {
      throw ConfigError(path.string() + ":1: expected column f" + std::to_string(j));
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<double> x(d);
  int max_label = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    auto fail = [&](const std::string& why) {
      return ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    if (fields.size() != d + 1) throw fail("expected " + std::to_string(d + 1) + " fields");
    for (std::size_t j = 0; j < d; ++j) {
      const auto f = trim(fields[j]);
      double v = 0.0;
      const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size() || !std::isfinite(v)) {
        throw fail("bad number '" + std::string(f) + "' in column f" + std::to_string(j));
      }
      x[j] = v;
    }
    const auto lf = trim(fields[d]);
    int y = -1;
    const auto [p, ec] = std::from_chars(lf.data(), lf.data() + lf.size(), y);
    if (ec != std::errc() || p != lf.data() + lf.size() || y < 0) {
      throw fail("label must be a non-negative integer, got '" + std::string(lf) + "'");
    }
    rows.push_back(x);
    labels.push_back(y);
    max_label = std::max(max_label, y);
  }
  if (rows.empty()) throw ConfigError(path.string() + ": no data rows");
  const int classes = num_classes > 0 ? num_classes : max_label + 1;
  Dataset ds(d, classes);
  ds.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) ds.add(rows[i], labels[i]);
  ds.validate();
  return ds;
}

void write_csv_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t j = 0; j < ds.dim(); ++j) out << 'f' << j << ',';
  out << "label\n";
  out.precision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.row(i)) out << v << ',';
    out << ds.label(i) << '\n';
  }
}

void standardize(std::span<Dataset*> datasets, const Dataset& reference) {
  const std::size_t d = reference.dim();
  const auto n = static_cast<double>(reference.size());
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const auto r = reference.row(i);
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / n;
  }
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const auto r = reference.row(i);
    for (std::size_t j = 0; j < d; ++j) sd[j] += (r[j] - mean[j]) * (r[j] - mean[j]) / n;
  }
  for (double& s : sd) s = s > 0.0 ? std::sqrt(s) : 1.0;

  for (Dataset* ds : datasets) {
    Dataset scaled(ds->dim(), ds->num_classes());
    scaled.reserve(ds->size());
    std::vector<double> x(d);
    for (std::size_t i = 0; i < ds->size(); ++i) {
      const auto r = ds->row(i);
      for (std::size_t j = 0; j < d; ++j) x[j] = (r[j] - mean[j]) / sd[j];
      scaled.add(x, ds->label(i));
    }
    *ds = std::move(scaled);
  }
}

}  // namespace dsl
