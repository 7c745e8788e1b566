// dslsim: run, sweep, validate and gradient-check swarm learning experiments.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dsl/config.hpp"
#include "dsl/error.hpp"
#include "dsl/harness.hpp"
#include "dsl/model.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCheck = 4;

std::uint64_t parse_u64(const std::string& s, const char* what) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw dsl::ConfigError(std::string(what) + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const std::uint64_t v = parse_u64(s, "--seeds");
    return {v, v};
  }
  const auto a = parse_u64(s.substr(0, dots), "--seeds");
  const auto b = parse_u64(s.substr(dots + 2), "--seeds");
  if (b < a) throw dsl::ConfigError("--seeds: empty range " + s);
  return {a, b};
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out) {
  nlohmann::json j = dsl::load_config_json(config_path);
  if (seed) j["seed"] = *seed;
  if (!out.empty()) j["output_dir"] = out;
  dsl::ExperimentConfig cfg = dsl::parse_config(j);
  if (cfg.output_dir.empty()) cfg.output_dir = "runs/seed" + std::to_string(cfg.seed);
  const dsl::RunResult r = dsl::run(cfg);
  if (!r.metrics.empty()) {
    const auto& last = r.metrics.back();
    std::printf("%s seed %llu: %zu rounds, test_acc %.4f, test_loss %.4f -> %s\n",
                dsl::to_string(cfg.algorithm), static_cast<unsigned long long>(cfg.seed),
                r.metrics.size(), last.test_accuracy, last.test_loss, cfg.output_dir.c_str());
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& overrides_path,
              const std::string& seeds, const std::string& out) {
  const nlohmann::json base = dsl::load_config_json(config_path);
  dsl::parse_config(base);  // fail fast on a bad base config
  const auto variants = dsl::parse_overrides(dsl::load_config_json(overrides_path));
  const auto [first, last] = parse_seed_range(seeds);
  const auto rows = dsl::sweep(base, variants, first, last, out);
  int failures = 0;
  for (const auto& r : rows) {
    const std::string seed = r.seed ? std::to_string(*r.seed) : "median";
    if (!r.error.empty()) {
      ++failures;
      std::printf("%-40s %-7s error: %s\n", r.variant.c_str(), seed.c_str(), r.error.c_str());
    } else {
      std::printf("%-40s %-7s acc %.4f loss %.4f scalars %llu\n", r.variant.c_str(), seed.c_str(),
                  r.final_test_acc, r.final_test_loss,
                  static_cast<unsigned long long>(r.uplink_scalars));
    }
  }
  if (!out.empty()) std::printf("summary: %s/summary.csv\n", out.c_str());
  return failures == 0 ? 0 : kExitNumeric;
}

int cmd_validate(const std::string& config_path) {
  const dsl::ExperimentConfig cfg = dsl::load_config(config_path);
  std::cout << dsl::to_json(cfg).dump(2) << '\n';
  return 0;
}

int cmd_gradcheck(const std::string& model) {
  dsl::ModelSpec spec{dsl::ModelKind::linear, 6, 0, 4};
  if (model == "mlp") spec = {dsl::ModelKind::mlp, 6, 5, 4};
  dsl::RngStream rng(7, "gradcheck");
  const dsl::Dataset data = dsl::gen_synthetic(40, spec.d_in, spec.classes, 2.0, rng);
  const dsl::ParamVector w = dsl::random_params(spec, 0.5, rng);
  const dsl::ParamVector anchor = dsl::random_params(spec, 0.5, rng);
  dsl::Batch batch{&data, std::vector<std::size_t>(data.size())};
  std::iota(batch.indices.begin(), batch.indices.end(), std::size_t{0});
  const auto report = dsl::finite_difference_check(spec, w, batch, dsl::Proximal{0.1, &anchor},
                                                   20, 1e-5, 1e-5, rng);
  std::printf("%s: %zu probes, max relative error %.3e -> %s\n", model.c_str(), report.probes,
              report.max_rel_error, report.passed ? "PASS" : "FAIL");
  return report.passed ? 0 : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed swarm learning simulator"};
  app.require_subcommand(1);

  std::string config_path, overrides_path, out, seeds = "1..1", model;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "Config file (JSON)")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Run config variants over a seed range");
  sweep->add_option("--config", config_path, "Base config file (JSON)")->required();
  sweep->add_option("--overrides", overrides_path, "Variant overrides (JSON)")->required();
  sweep->add_option("--seeds", seeds, "Seed range A..B");
  sweep->add_option("--out", out, "Output directory");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck->add_option("--model", model, "Model kind")
      ->required()
      ->check(CLI::IsMember({"linear", "mlp"}));

  auto* validate = app.add_subcommand("validate", "Parse and echo a resolved config");
  validate->add_option("--config", config_path, "Config file (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed, out);
    if (*sweep) return cmd_sweep(config_path, overrides_path, seeds, out.empty() ? "sweep" : out);
    if (*gradcheck) return cmd_gradcheck(model);
    if (*validate) return cmd_validate(config_path);
  } catch (const dsl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const dsl::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
