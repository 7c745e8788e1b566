#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dsl/channel.hpp"
#include "dsl/config.hpp"
#include "dsl/model.hpp"
#include "dsl/optimizer.hpp"
#include "dsl/robustness.hpp"
#include "dsl/schedule.hpp"
#include "dsl/selection.hpp"

namespace dsl {

// Model training objective: each worker's gradient uses a fresh minibatch of
// its own training set per round (without replacement, stream
// (seed, "batch", worker, round)); the score is the unregularized loss on the
// shared scoring set.
class DatasetObjective final : public Objective {
 public:
  DatasetObjective(ModelSpec spec, std::vector<std::shared_ptr<const Dataset>> train_sets,
                   std::shared_ptr<const Dataset> score_set, std::size_t batch_size, double mu,
                   std::uint64_t seed);

  std::size_t dim() const override { return spec_.param_dim(); }
  ParamVector local_gradient(int worker, int round, const ParamVector& w,
                             const ParamVector& anchor) const override;
  double score(const ParamVector& w) const override;

  Batch sample_batch(int worker, int round) const;
  const ModelSpec& spec() const { return spec_; }
  const Dataset& train_set(int worker) const { return *train_sets_.at(static_cast<std::size_t>(worker)); }
  const Dataset& score_set() const { return *score_set_; }

 private:
  ModelSpec spec_;
  std::vector<std::shared_ptr<const Dataset>> train_sets_;
  std::shared_ptr<const Dataset> score_set_;
  std::size_t batch_size_;
  double mu_;
  std::uint64_t seed_;
};

struct SimulationConfig {
  Algorithm algorithm = Algorithm::dsl;
  int num_workers = 1;
  HyperSchedule schedule;
  VelocityRule velocity_rule = VelocityRule::bi_displacement;
  CoeffDraw coeff_draw = CoeffDraw::per_coordinate;
  double init_scale = 0.05;
  ChannelModel channel;
  CensorPolicy censoring;
  AttackSpec attacks;
  ScreeningPolicy screening;  // tau already resolved
  FailureSpec failures;
  std::uint64_t seed = 1;

  static SimulationConfig from(const ExperimentConfig& cfg);
};

// What happened in the most recent round.
struct RoundReport {
  int round = 0;
  RoundParams params;
  std::vector<int> selected;       // initial selection
  std::vector<ScreenResult> screens;  // one per aggregation attempt
  int s_eff = 0;                   // contributors to the accepted aggregate
  bool carried_over = true;        // previous global model kept
};

// The synchronous round loop shared by DSL and both baselines. Per DSL round:
// hybrid step and local-best update for every live worker, censored score
// reports, rank selection, link failures, Byzantine transmission, channel +
// power control + over-the-air aggregation, then screening with reselection.
class SwarmSimulation {
 public:
  SwarmSimulation(SimulationConfig cfg, const Objective& objective);

  const RoundReport& step();
  bool done() const { return swarm_.round >= cfg_.schedule.rounds_total; }

  const SwarmState& swarm() const { return swarm_; }
  const std::vector<WorkerState>& workers() const { return workers_; }
  const std::vector<int>& live_workers() const { return live_; }
  const std::vector<char>& failed_nodes() const { return failed_; }
  const std::vector<int>& byzantine_ids() const { return byzantine_; }
  const RoundReport& last_round() const { return report_; }
  const SimulationConfig& config() const { return cfg_; }

 private:
  PsoCoeffs draw_coeffs(int id, int t) const;
  void step_dsl();
  void step_fl();
  void step_pso();
  struct Delivery {
    OtaResult agg;
    std::vector<int> contributors;
  };
  // Link failures, channel, power control, OTA. nullopt: nothing arrived.
  std::optional<Delivery> transmit(std::span<const int> ids,
                                   std::span<const ParamVector* const> models, int attempt);

  SimulationConfig cfg_;
  const Objective& objective_;
  std::vector<WorkerState> workers_;
  std::vector<int> live_;
  std::vector<char> failed_;
  std::vector<int> byzantine_;
  SwarmState swarm_;
  RoundReport report_;
};

}  // namespace dsl
