#include <numeric>

#include <benchmark/benchmark.h>

#include "dsl/data.hpp"
#include "dsl/model.hpp"

namespace {

using namespace dsl;

// Args: hidden width (0 = linear), batch size.
void BM_LossAndGradient(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const ModelSpec spec{hidden == 0 ? ModelKind::linear : ModelKind::mlp, 20, hidden, 5};
  RngStream rng(1, "bench_model");
  const Dataset data = gen_synthetic(static_cast<std::size_t>(state.range(1)), 20, 5, 3.0, rng);
  const ParamVector w = random_params(spec, 0.1, rng);
  Batch batch{&data, std::vector<std::size_t>(data.size())};
  std::iota(batch.indices.begin(), batch.indices.end(), std::size_t{0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss(spec, w, batch));
    benchmark::DoNotOptimize(grad(spec, w, batch));
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_LossAndGradient)->Args({0, 32})->Args({16, 32})->Args({16, 256})->Args({64, 256});

void BM_Accuracy(benchmark::State& state) {
  const ModelSpec spec{ModelKind::mlp, 20, 16, 5};
  RngStream rng(2, "bench_model");
  const Dataset data = gen_synthetic(2500, 20, 5, 3.0, rng);
  const ParamVector w = random_params(spec, 0.1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(accuracy(spec, w, data));
  state.SetItemsProcessed(state.iterations() * 2500);
}
BENCHMARK(BM_Accuracy);

}  // namespace
