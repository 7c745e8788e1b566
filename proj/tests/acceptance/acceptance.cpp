// End-to-end acceptance checks. Each criterion prints one line:
//   A<n> PASS|FAIL <details>
// Usage: dsl_acceptance [A1 ... A11]   (no arguments runs all of them)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dsl/channel.hpp"
#include "dsl/config.hpp"
#include "dsl/data.hpp"
#include "dsl/error.hpp"
#include "dsl/harness.hpp"
#include "dsl/model.hpp"
#include "dsl/optimizer.hpp"
#include "dsl/simulation.hpp"

namespace {

using namespace dsl;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Base for the classification criteria: the default synthetic task with
// strong label skew.
ExperimentConfig noniid_base() {
  ExperimentConfig cfg = default_config();
  cfg.data.partition.dirichlet_alpha = 0.1;
  return cfg;
}

RunResult quiet_run(ExperimentConfig cfg, std::uint64_t seed, bool record_f_best = false) {
  cfg.seed = seed;
  cfg.resolve();
  cfg.validate();
  RunOptions opts;
  opts.write_files = false;
  opts.record_f_best = record_f_best;
  return run(cfg, opts);
}

std::vector<double> final_accuracies(const ExperimentConfig& cfg) {
  std::vector<double> acc;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    acc.push_back(quiet_run(cfg, seed).metrics.back().test_accuracy);
  }
  return acc;
}

Outcome a1_gradients() {
  double worst = 0.0;
  bool ok = true;
  for (const ModelSpec spec : {ModelSpec{ModelKind::linear, 8, 0, 4}, ModelSpec{ModelKind::mlp, 8, 6, 4}}) {
    RngStream rng(101, "acceptance_grad", spec.hidden);
    const Dataset data = gen_synthetic(60, spec.d_in, spec.classes, 2.0, rng);
    const ParamVector w = random_params(spec, 0.5, rng);
    const ParamVector anchor = random_params(spec, 0.5, rng);
    Batch batch{&data, std::vector<std::size_t>(data.size())};
    std::iota(batch.indices.begin(), batch.indices.end(), std::size_t{0});
    const auto r = finite_difference_check(spec, w, batch, Proximal{0.1, &anchor}, 40, 1e-5,
                                           1e-5, rng);
    worst = std::max(worst, r.max_rel_error);
    ok = ok && r.passed && r.probes >= 20;
  }
  return {ok, "max relative error " + fmt("%.2e", worst) + " (linear + mlp, 40 probes each)"};
}

Outcome a2_pso_reduction() {
  RngStream rng(202, "acceptance_sphere");
  ParamVector center(10);
  for (double& x : center) x = rng.uniform(-1.0, 1.0);
  const SphereObjective obj(center);

  SimulationConfig sc;
  sc.algorithm = Algorithm::dsl;
  sc.num_workers = 20;
  sc.schedule.lambda_init = sc.schedule.lambda_final = 1.0;
  sc.schedule.c0_init = 0.9;
  sc.schedule.c0_final = 0.4;
  sc.schedule.c1_max = sc.schedule.c2_max = 1.5;
  sc.schedule.s_init = sc.schedule.s_final = 1;
  sc.schedule.rounds_total = 500;
  sc.init_scale = 2.0;
  sc.seed = 202;
  SwarmSimulation sim(sc, obj);

  std::vector<WorkerState> ps;
  for (int i = 0; i < sc.num_workers; ++i) ps.push_back(make_worker(i, 10, sc.init_scale, sc.seed));
  SwarmState ref;
  ref.w_global = ParamVector(10, 0.0);
  const ScoreFn score = [&](const ParamVector& w) { return obj.score(w); };

  double max_dev = 0.0, best = INFINITY;
  while (!sim.done()) {
    const int t = sim.swarm().round;
    sim.step();
    std::vector<PsoCoeffs> c;
    for (const auto& p : ps) c.push_back(draw_pso_coeffs(sc.seed, p.id, t, 1.5, 1.5, 10));
    ref = pso_round(ps, ref, eval_schedule(sc.schedule, t), c, score);
    max_dev = std::max(max_dev, max_abs_diff(sim.swarm().w_global, ref.w_global));
    for (int i = 0; i < sc.num_workers; ++i) {
      max_dev = std::max(max_dev, max_abs_diff(sim.workers()[i].w, ps[i].w));
      best = std::min(best, sim.workers()[i].f_best);
    }
  }
  return {best < 1e-2 && max_dev <= 1e-12,
          "best " + fmt("%.3e", best) + ", max deviation from pso_round " + fmt("%.1e", max_dev)};
}

Outcome a3_sgd_reduction() {
  ExperimentConfig cfg = noniid_base();
  cfg.num_workers = 10;
  cfg.rounds = 100;
  cfg.data.n = 3000;
  cfg.schedules.lambda_init = cfg.schedules.lambda_final = 0.0;
  cfg.schedules.s_init = 1;
  cfg.schedules.s_final = 10;
  cfg.resolve();
  cfg.validate();
  const PreparedData data = prepare_data(cfg);
  const DatasetObjective objective(cfg.model, data.train_sets,
                                   std::make_shared<const Dataset>(data.global.score_part),
                                   cfg.data.batch_size, cfg.schedules.mu, cfg.seed);
  SwarmSimulation sim(SimulationConfig::from(cfg), objective);
  std::vector<ParamVector> ref;
  for (int i = 0; i < cfg.num_workers; ++i) {
    ref.push_back(make_worker(i, objective.dim(), cfg.optimizer.init_scale, cfg.seed).w);
  }
  double max_dev = 0.0;
  for (int t = 0; t < cfg.rounds; ++t) {
    sim.step();
    for (int i = 0; i < cfg.num_workers; ++i) {
      ref[i] = sgd_step(ref[i], cfg.schedules.alpha,
                        grad(cfg.model, ref[i], objective.sample_batch(i, t)));
      max_dev = std::max(max_dev, max_abs_diff(sim.workers()[i].w, ref[i]));
    }
  }
  return {max_dev <= 1e-12, "max deviation over 100 rounds " + fmt("%.1e", max_dev)};
}

Outcome a4_ota() {
  RngStream rng(404, "acceptance_ota");
  std::vector<ParamVector> ws;
  for (int i = 0; i < 4; ++i) {
    ParamVector w(8);
    for (double& x : w) x = rng.uniform(-3.0, 3.0);
    ws.push_back(std::move(w));
  }
  ParamVector mean(8, 0.0);
  for (const auto& w : ws) mean.axpy(0.25, w);

  // Ideal: unit gains and powers, no noise.
  std::vector<Contribution> ideal;
  for (const auto& w : ws) ideal.push_back({&w, 1.0, 1.0, true});
  const double ideal_err = max_abs_diff(ota_aggregate(ideal, 0.0, rng).w_global, mean);

  // Fading with exact inversion; the aggregate is still the mean plus noise.
  std::vector<Contribution> faded;
  for (const auto& w : ws) {
    const double h = 0.5 + rng.uniform();
    faded.push_back({&w, h, 1.0 / h, true});
  }
  const int trials = 10000;
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (int k = 0; k < trials; ++k) {
    const OtaResult r = ota_aggregate(faded, 0.04, rng);
    for (std::size_t j = 0; j < mean.size(); ++j) {
      const double e = r.w_global[j] - mean[j];
      sum += e;
      sum_sq += e * e;
      ++count;
    }
  }
  const double m = sum / static_cast<double>(count);
  const double var = sum_sq / static_cast<double>(count) - m * m;
  const bool ok = ideal_err <= 1e-9 && std::abs(var - 0.0025) <= 0.1 * 0.0025;
  return {ok, "ideal error " + fmt("%.1e", ideal_err) + ", noise variance " + fmt("%.5f", var) +
                  " (target 0.0025)"};
}

Outcome a5_monotone_fbest() {
  ExperimentConfig cfg = noniid_base();
  cfg.attacks = {AttackKind::sign_flip, 5, 10.0, false};
  cfg.screening = {true, 0.0, true, 3};
  cfg.failures = {0.2, 0.05};
  const RunResult r = quiet_run(cfg, 3, true);
  std::size_t checks = 0, violations = 0;
  for (std::size_t t = 1; t < r.f_best_trace.size(); ++t) {
    for (std::size_t i = 0; i < r.f_best_trace[t].size(); ++i) {
      if (std::binary_search(r.byzantine_ids.begin(), r.byzantine_ids.end(), static_cast<int>(i))) {
        continue;
      }
      ++checks;
      if (r.f_best_trace[t][i] > r.f_best_trace[t - 1][i]) ++violations;
    }
  }
  return {checks > 0 && violations == 0,
          std::to_string(violations) + " increases in " + std::to_string(checks) +
              " honest round-to-round comparisons"};
}

Outcome a6_noniid_sharing() {
  ExperimentConfig share = noniid_base();
  ExperimentConfig noshare = share;
  noshare.data.share_global = false;
  ExperimentConfig fl = noshare;
  fl.algorithm = Algorithm::fl;
  const double m_share = median(final_accuracies(share));
  const double m_noshare = median(final_accuracies(noshare));
  const double m_fl = median(final_accuracies(fl));
  return {m_share > m_noshare && m_share > m_fl,
          "median acc share " + fmt("%.4f", m_share) + ", no share " + fmt("%.4f", m_noshare) +
              ", FL " + fmt("%.4f", m_fl)};
}

Outcome a7_byzantine() {
  ExperimentConfig off = noniid_base();
  off.attacks = {AttackKind::sign_flip, 10, 10.0, false};
  ExperimentConfig on = off;
  on.screening = {true, 0.0, true, 3};
  std::vector<double> acc_on, acc_off;
  std::uint64_t min_rejected = UINT64_MAX;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RunResult r = quiet_run(on, seed);
    acc_on.push_back(r.metrics.back().test_accuracy);
    min_rejected = std::min(min_rejected, r.metrics.back().rejected);
    acc_off.push_back(quiet_run(off, seed).metrics.back().test_accuracy);
  }
  const double m_on = median(acc_on), m_off = median(acc_off);
  return {m_on > m_off && min_rejected >= 1,
          "median acc screening on " + fmt("%.4f", m_on) + ", off " + fmt("%.4f", m_off) +
              ", fewest rejections " + std::to_string(min_rejected)};
}

Outcome a8_link_failures() {
  ExperimentConfig clean = noniid_base();
  clean.schedules.s_init = 1;
  clean.schedules.s_final = 10;
  ExperimentConfig lossy = clean;
  lossy.failures.link_drop_prob = 0.3;
  const double m_clean = median(final_accuracies(clean));
  const std::vector<double> lossy_acc = final_accuracies(lossy);
  const double m_lossy = median(lossy_acc);
  return {m_clean - m_lossy <= 0.05,
          "median acc drop 0.3 " + fmt("%.4f", m_lossy) + ", failure-free " + fmt("%.4f", m_clean) +
              ", worst lossy seed " +
              fmt("%.4f", *std::min_element(lossy_acc.begin(), lossy_acc.end()))};
}

Outcome a9_censoring() {
  const ExperimentConfig base = noniid_base();
  const double m_base = median(final_accuracies(base));
  const double ut = static_cast<double>(base.num_workers) * base.rounds;
  std::string best = "none";
  bool found = false;
  for (double threshold : {0.01, 0.03, 0.1}) {
    ExperimentConfig cfg = base;
    cfg.censoring = {true, threshold, 1.0};
    std::vector<double> acc, uplinks;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const RunResult r = quiet_run(cfg, seed);
      acc.push_back(r.metrics.back().test_accuracy);
      uplinks.push_back(static_cast<double>(r.metrics.back().uplink_scalars));
    }
    const double m_acc = median(acc);
    const double worst_uplinks = *std::max_element(uplinks.begin(), uplinks.end());
    if (worst_uplinks <= 0.7 * ut && m_acc >= m_base - 0.01) {
      if (!found) {
        best = "threshold " + fmt("%g", threshold) + ": uplinks <= " + fmt("%.0f", worst_uplinks) +
               " of " + fmt("%.0f", ut) + ", median acc " + fmt("%.4f", m_acc) + " vs " +
               fmt("%.4f", m_base);
      }
      found = true;
    }
  }
  return {found, best};
}

Outcome a10_determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "dsl_acceptance_a10";
  fs::remove_all(root);
  ExperimentConfig cfg = noniid_base();
  cfg.rounds = 60;
  cfg.channel = {ChannelKind::rayleigh, 0.001, 1.0, 0.1, PowerPolicy::inversion};
  cfg.attacks = {AttackKind::sign_flip, 5, 10.0, true};
  cfg.screening = {true, 0.0, true, 3};
  cfg.censoring = {true, 0.02, 0.99};
  cfg.failures = {0.2, 0.05};
  cfg.seed = 10;
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::vector<std::string> csv;
  for (const char* name : {"a", "b"}) {
    cfg.output_dir = (root / name).string();
    cfg.resolve();
    run(cfg);
    csv.push_back(slurp(root / name / "metrics.csv"));
  }
  fs::remove_all(root);
  return {!csv[0].empty() && csv[0] == csv[1],
          std::to_string(csv[0].size()) + " bytes, identical: " + (csv[0] == csv[1] ? "yes" : "no")};
}

Outcome a11_convergence() {
  ExperimentConfig cfg = default_config();
  cfg.model = {ModelKind::linear, cfg.model.d_in, 0, cfg.model.classes};
  cfg.data.partition.mode = PartitionMode::iid;
  ExperimentConfig long_cfg = cfg;
  cfg.rounds = 400;
  long_cfg.rounds = 4000;

  std::vector<double> gap(400, 0.0);
  bool every_seed_improves = true, positive = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RunResult r = quiet_run(cfg, seed);
    const RunResult ref = quiet_run(long_cfg, seed);
    double f_star = INFINITY;
    for (const auto& m : ref.metrics) f_star = std::min(f_star, m.mean_local_f_best);
    f_star = std::min(f_star, r.metrics.back().mean_local_f_best);
    every_seed_improves = every_seed_improves &&
                          r.metrics[399].mean_local_f_best < r.metrics[99].mean_local_f_best;
    for (std::size_t t = 0; t < 400; ++t) gap[t] += (r.metrics[t].mean_local_f_best - f_star) / 5.0;
  }
  // Least-squares slope of log(gap) against log(t), t = 1..400.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t t = 0; t < 400; ++t) {
    if (!(gap[t] > 0.0)) {
      positive = false;
      break;
    }
    const double x = std::log(static_cast<double>(t + 1)), y = std::log(gap[t]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = 400.0;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {positive && every_seed_improves && slope <= -0.5,
          "log-log slope " + fmt("%.3f", slope) + ", F(400) < F(100) for every seed: " +
              (every_seed_improves ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<Outcome()>> criteria{
      {"A1", a1_gradients},     {"A2", a2_pso_reduction},  {"A3", a3_sgd_reduction},
      {"A4", a4_ota},           {"A5", a5_monotone_fbest}, {"A6", a6_noniid_sharing},
      {"A7", a7_byzantine},     {"A8", a8_link_failures},  {"A9", a9_censoring},
      {"A10", a10_determinism}, {"A11", a11_convergence}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  if (wanted.empty()) {
    for (int i = 1; i <= 11; ++i) wanted.push_back("A" + std::to_string(i));
  }
  int failures = 0;
  for (const auto& name : wanted) {
    const auto it = criteria.find(name);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %s\n", name.c_str());
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s %s [%.1fs]\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
