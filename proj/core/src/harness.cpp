#include "dsl/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dsl/error.hpp"
#include "dsl/simulation.hpp"

namespace dsl {

using nlohmann::json;

const char* const kMetricsHeader =
    "round,algo,seed,test_acc,test_loss,score_loss,mean_fbest,weight_div,uplink_scalars,"
    "uplink_vectors,ota_uses,s_eff,rejected";

PreparedData prepare_data(const ExperimentConfig& cfg) {
  Dataset full;
  if (!cfg.data.csv_path.empty()) {
    full = read_csv_dataset(cfg.data.csv_path, cfg.model.classes);
    if (full.dim() != cfg.model.d_in) {
      throw ConfigError("data.csv_path: file has " + std::to_string(full.dim()) +
                        " features but model.d_in is " + std::to_string(cfg.model.d_in));
    }
  } else {
    RngStream rng(cfg.seed, "data");
    full = gen_synthetic(cfg.data.n, cfg.model.d_in, cfg.model.classes, cfg.data.sep, rng);
  }

  RngStream holdout_rng(cfg.seed, "holdout");
  auto [pool, test] = split_holdout(full, cfg.data.test_fraction, holdout_rng);
  if (test.empty()) throw ConfigError("data.test_fraction: empty test set");
  if (cfg.data.standardize) {
    const Dataset reference = pool;
    Dataset* sets[] = {&pool, &test};
    standardize(sets, reference);
  }

  PartitionSpec spec = cfg.data.partition;
  spec.num_workers = cfg.num_workers;
  Partition part = partition_noniid(pool, spec, cfg.seed);

  PreparedData out;
  out.test = std::move(test);
  out.global = std::move(part.global);
  out.train_sets.reserve(part.locals.size());
  for (auto& local : part.locals) {
    if (cfg.data.share_global) {
      out.train_sets.push_back(std::make_shared<const Dataset>(merge_global_train(local, out.global)));
    } else {
      out.train_sets.push_back(std::make_shared<const Dataset>(std::move(local)));
    }
  }
  return out;
}

std::string format_metrics_row(const RoundMetrics& m, Algorithm algo, std::uint64_t seed) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%d,%s,%" PRIu64 ",%.9g,%.9g,%.9g,%.9g,%.9g,%" PRIu64 ",%" PRIu64 ",%" PRIu64
                ",%d,%" PRIu64,
                m.round, to_string(algo), seed, m.test_accuracy, m.test_loss,
                m.global_score_loss, m.mean_local_f_best, m.weight_divergence, m.uplink_scalars,
                m.uplink_vectors, m.ota_uses, m.s_effective, m.rejected);
  return buf;
}

namespace {

struct Context {
  PreparedData data;
  std::shared_ptr<const Dataset> score_set;
  std::unique_ptr<DatasetObjective> objective;
};

Context make_context(const ExperimentConfig& cfg) {
  Context ctx;
  ctx.data = prepare_data(cfg);
  ctx.score_set = std::make_shared<const Dataset>(ctx.data.global.score_part);
  ctx.objective = std::make_unique<DatasetObjective>(cfg.model, ctx.data.train_sets,
                                                     ctx.score_set, cfg.data.batch_size,
                                                     cfg.schedules.mu, cfg.seed);
  return ctx;
}

RoundMetrics collect(const SwarmSimulation& sim, const Context& ctx, const ModelSpec& spec) {
  const SwarmState& swarm = sim.swarm();
  RoundMetrics m;
  m.round = sim.last_round().round;
  m.test_accuracy = accuracy(spec, swarm.w_global, ctx.data.test);
  m.test_loss = loss(spec, swarm.w_global, ctx.data.test);
  m.global_score_loss = ctx.objective->score(swarm.w_global);

  std::vector<ParamVector> local;
  double f_sum = 0.0;
  for (int id : sim.live_workers()) {
    const auto& w = sim.workers()[static_cast<std::size_t>(id)];
    f_sum += w.f_best;
    local.push_back(w.w);
  }
  if (local.empty()) {
    m.mean_local_f_best = std::numeric_limits<double>::quiet_NaN();
  } else {
    m.mean_local_f_best = f_sum / static_cast<double>(local.size());
    m.weight_divergence = weight_divergence(local, swarm.w_global).value;
  }
  m.uplink_scalars = swarm.counters.uplink_scalars;
  m.uplink_vectors = swarm.counters.uplink_vectors;
  m.ota_uses = swarm.counters.ota_uses;
  m.s_effective = sim.last_round().s_eff;
  m.rejected = swarm.counters.rejected;
  return m;
}

constexpr int kPilotRounds = 5;
constexpr double kTauFactor = 3.0;
// Floor for a pilot that saw no gap at all (e.g. single-worker aggregates).
constexpr double kTauFloor = 1e-3;

}  // namespace

double calibrate_tau(const ExperimentConfig& cfg) {
  ExperimentConfig pilot = cfg;
  pilot.attacks = AttackSpec{};
  pilot.screening.enabled = false;
  // Early rounds of a ramped schedule aggregate a single worker, which has no
  // gap at all; measure at the largest selection size instead.
  const int s_max = std::max(pilot.schedules.s_init, pilot.schedules.s_final);
  pilot.schedules.s_init = s_max;
  pilot.schedules.s_final = s_max;
  Context ctx = make_context(pilot);
  SwarmSimulation sim(SimulationConfig::from(pilot), *ctx.objective);
  double max_gap = 0.0;
  for (int t = 0; t < kPilotRounds && !sim.done(); ++t) {
    const RoundReport& r = sim.step();
    for (const auto& s : r.screens) {
      if (std::isfinite(s.deviation)) max_gap = std::max(max_gap, s.deviation);
    }
  }
  return std::max(kTauFactor * max_gap, kTauFloor);
}

RunResult run(const ExperimentConfig& config, const RunOptions& options) {
  ExperimentConfig cfg = config;
  cfg.resolve();
  cfg.validate();
  if (cfg.screening.enabled && cfg.screening.auto_tau) {
    cfg.screening.tau = calibrate_tau(cfg);
  }

  RunResult result;
  result.tau_used = cfg.screening.tau;
  Context ctx = make_context(cfg);
  SwarmSimulation sim(SimulationConfig::from(cfg), *ctx.objective);
  result.byzantine_ids = sim.byzantine_ids();
  result.failed_nodes = sim.failed_nodes();

  std::ofstream csv;
  if (options.write_files) {
    if (cfg.output_dir.empty()) throw ConfigError("output_dir: required to write metrics");
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["config"] = to_json(cfg);
    manifest["seed"] = cfg.seed;
    manifest["screening_tau_used"] = cfg.screening.tau;
    manifest["byzantine_ids"] = result.byzantine_ids;
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
    csv.open(dir / "metrics.csv", std::ios::trunc);
    if (!csv) throw ConfigError("output_dir: cannot write " + (dir / "metrics.csv").string());
    csv << kMetricsHeader << '\n' << std::flush;
  }

  while (!sim.done()) {
    try {
      sim.step();
    } catch (const NumericError& e) {
      result.aborted = true;
      result.error = e.what();
      throw;
    }
    result.metrics.push_back(collect(sim, ctx, cfg.model));
    if (options.record_f_best) {
      std::vector<double> fb;
      fb.reserve(sim.workers().size());
      for (const auto& w : sim.workers()) fb.push_back(w.f_best);
      result.f_best_trace.push_back(std::move(fb));
    }
    if (csv.is_open()) {
      csv << format_metrics_row(result.metrics.back(), cfg.algorithm, cfg.seed) << '\n'
          << std::flush;
    }
  }
  return result;
}

namespace {

json dotted_patch(const std::string& key, const json& value) {
  json patch = value;
  std::string rest = key;
  std::vector<std::string> parts;
  std::size_t pos;
  while ((pos = rest.find('.')) != std::string::npos) {
    parts.push_back(rest.substr(0, pos));
    rest = rest.substr(pos + 1);
  }
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    json outer = json::object();
    outer[*it] = std::move(patch);
    patch = std::move(outer);
  }
  return patch;
}

std::string value_label(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

std::vector<SweepVariant> parse_overrides(const json& overrides) {
  std::vector<SweepVariant> out;
  if (overrides.is_array()) {
    for (std::size_t i = 0; i < overrides.size(); ++i) {
      const json& item = overrides[i];
      if (!item.is_object()) throw ConfigError("overrides[" + std::to_string(i) + "]: expected an object");
      if (item.contains("patch")) {
        SweepVariant v{item.value("name", "variant" + std::to_string(i)), item.at("patch")};
        out.push_back(std::move(v));
      } else {
        out.push_back({item.dump(), item});
      }
    }
  } else if (overrides.is_object()) {
    out.push_back({"", json::object()});
    for (const auto& [key, values] : overrides.items()) {
      if (!values.is_array() || values.empty()) {
        throw ConfigError("overrides." + key + ": expected a non-empty list of values");
      }
      std::vector<SweepVariant> next;
      for (const auto& base : out) {
        for (const auto& v : values) {
          SweepVariant sv = base;
          sv.patch.merge_patch(dotted_patch(key, v));
          sv.name += (sv.name.empty() ? "" : ";") + key + "=" + value_label(v);
          next.push_back(std::move(sv));
        }
      }
      out = std::move(next);
    }
  } else {
    throw ConfigError("overrides: expected a list of patches or an object of value lists");
  }
  if (out.empty()) throw ConfigError("overrides: at least one variant required");
  return out;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::uint64_t median_count(const std::vector<std::uint64_t>& v) {
  std::vector<double> d(v.begin(), v.end());
  return static_cast<std::uint64_t>(std::llround(median(d)));
}

}  // namespace

std::vector<SweepRow> sweep(const json& base, const std::vector<SweepVariant>& variants,
                            std::uint64_t seed_first, std::uint64_t seed_last,
                            const std::filesystem::path& out_dir) {
  if (variants.empty()) throw ConfigError("overrides: at least one variant required");
  if (seed_last < seed_first) throw ConfigError("seeds: empty range");
  std::vector<SweepRow> rows;
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    const SweepVariant& variant = variants[vi];
    std::vector<SweepRow> ok;
    for (std::uint64_t seed = seed_first; seed <= seed_last; ++seed) {
      SweepRow row;
      row.variant = variant.name;
      row.seed = seed;
      try {
        json j = base;
        j.merge_patch(variant.patch);
        j["seed"] = seed;
        RunOptions opts;
        opts.write_files = !out_dir.empty();
        if (opts.write_files) {
          j["output_dir"] =
              (out_dir / ("v" + std::to_string(vi) + "_seed" + std::to_string(seed))).string();
        }
        const RunResult r = run(parse_config(j), opts);
        if (!r.metrics.empty()) {
          const RoundMetrics& last = r.metrics.back();
          row.final_test_acc = last.test_accuracy;
          row.final_test_loss = last.test_loss;
          row.uplink_scalars = last.uplink_scalars;
          row.uplink_vectors = last.uplink_vectors;
          row.rejected = last.rejected;
        }
        ok.push_back(row);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows.push_back(row);
    }
    if (seed_last == seed_first) continue;
    SweepRow med;
    med.variant = variant.name;
    if (ok.empty()) {
      med.error = "no successful runs";
    } else {
      std::vector<double> acc, tl;
      std::vector<std::uint64_t> us, uv, rj;
      for (const auto& r : ok) {
        acc.push_back(r.final_test_acc);
        tl.push_back(r.final_test_loss);
        us.push_back(r.uplink_scalars);
        uv.push_back(r.uplink_vectors);
        rj.push_back(r.rejected);
      }
      med.final_test_acc = median(acc);
      med.final_test_loss = median(tl);
      med.uplink_scalars = median_count(us);
      med.uplink_vectors = median_count(uv);
      med.rejected = median_count(rj);
    }
    rows.push_back(med);
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_sweep_summary(rows, out_dir / "summary.csv");
  }
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

}  // namespace

void write_sweep_summary(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "variant,seed,final_test_acc,final_test_loss,uplink_scalars,uplink_vectors,rejected,error\n";
  char buf[256];
  for (const auto& r : rows) {
    const std::string seed = r.seed ? std::to_string(*r.seed) : "median";
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%" PRIu64 ",%" PRIu64 ",%" PRIu64, r.final_test_acc,
                  r.final_test_loss, r.uplink_scalars, r.uplink_vectors, r.rejected);
    out << csv_field(r.variant) << ',' << seed << ',' << buf << ',' << csv_field(r.error) << '\n';
  }
}

}  // namespace dsl
