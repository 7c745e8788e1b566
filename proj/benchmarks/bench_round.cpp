#include <memory>

#include <benchmark/benchmark.h>

#include "dsl/channel.hpp"
#include "dsl/config.hpp"
#include "dsl/harness.hpp"
#include "dsl/optimizer.hpp"
#include "dsl/simulation.hpp"

namespace {

using namespace dsl;

void BM_DslStep(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  WorkerState s = make_worker(0, dim, 0.1, 1);
  const ParamVector wg(dim, 0.5);
  const PsoCoeffs c = draw_pso_coeffs(1, 0, 0, 0.3, 0.3, dim);
  const RoundParams rp{0.5, 0.7, 1, 0.0};
  const GradientFn g = [](const ParamVector& w) { return w; };
  for (auto _ : state) benchmark::DoNotOptimize(dsl_step(s, rp, c, wg, 0.1, g));
}
BENCHMARK(BM_DslStep)->Arg(421)->Arg(10000);

// Args: number of contributors, dimension.
void BM_OtaAggregate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  std::vector<ParamVector> ws(n, ParamVector(dim, 1.0));
  std::vector<Contribution> cs;
  for (const auto& w : ws) cs.push_back({&w, 0.8, 1.25, true});
  RngStream rng(3, "bench_ota");
  for (auto _ : state) benchmark::DoNotOptimize(ota_aggregate(cs, 0.01, rng));
}
BENCHMARK(BM_OtaAggregate)->Args({10, 421})->Args({50, 421})->Args({50, 10000});

void BM_FullRound(benchmark::State& state) {
  ExperimentConfig cfg = default_config();
  cfg.algorithm = static_cast<Algorithm>(state.range(0));
  cfg.channel = {ChannelKind::rayleigh, 0.001, 1.0, 0.1, PowerPolicy::inversion};
  cfg.rounds = 1000000;
  cfg.resolve();
  const PreparedData data = prepare_data(cfg);
  const DatasetObjective objective(cfg.model, data.train_sets,
                                   std::make_shared<const Dataset>(data.global.score_part),
                                   cfg.data.batch_size, cfg.schedules.mu, cfg.seed);
  SwarmSimulation sim(SimulationConfig::from(cfg), objective);
  for (auto _ : state) benchmark::DoNotOptimize(sim.step());
}
BENCHMARK(BM_FullRound)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
