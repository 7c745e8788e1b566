#include "dsl/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dsl/error.hpp"

namespace dsl {

DatasetObjective::DatasetObjective(ModelSpec spec,
                                   std::vector<std::shared_ptr<const Dataset>> train_sets,
                                   std::shared_ptr<const Dataset> score_set,
                                   std::size_t batch_size, double mu, std::uint64_t seed)
    : spec_(spec),
      train_sets_(std::move(train_sets)),
      score_set_(std::move(score_set)),
      batch_size_(batch_size),
      mu_(mu),
      seed_(seed) {
  if (!score_set_ || score_set_->empty()) throw ConfigError("data: empty scoring set");
  for (const auto& ds : train_sets_) {
    if (!ds || ds->empty()) throw ConfigError("data: empty worker training set");
  }
}

Batch DatasetObjective::sample_batch(int worker, int round) const {
  const Dataset& ds = train_set(worker);
  Batch b{&ds, {}};
  const std::size_t n = ds.size();
  b.indices.resize(n);
  std::iota(b.indices.begin(), b.indices.end(), std::size_t{0});
  if (batch_size_ >= n) return b;
  RngStream rng(seed_, "batch", static_cast<std::uint64_t>(worker),
                static_cast<std::uint64_t>(round));
  // Partial Fisher-Yates: the first batch_size_ entries are a uniform sample.
  for (std::size_t i = 0; i < batch_size_; ++i) {
    const std::size_t j = i + rng.index(n - i);
    std::swap(b.indices[i], b.indices[j]);
  }
  b.indices.resize(batch_size_);
  return b;
}

ParamVector DatasetObjective::local_gradient(int worker, int round, const ParamVector& w,
                                             const ParamVector& anchor) const {
  const Batch batch = sample_batch(worker, round);
  return grad(spec_, w, batch, Proximal{mu_, &anchor});
}

double DatasetObjective::score(const ParamVector& w) const { return loss(spec_, w, *score_set_); }

SimulationConfig SimulationConfig::from(const ExperimentConfig& cfg) {
  SimulationConfig s;
  s.algorithm = cfg.algorithm;
  s.num_workers = cfg.num_workers;
  s.schedule = cfg.schedules;
  s.schedule.rounds_total = cfg.rounds;
  s.velocity_rule = cfg.optimizer.velocity_rule;
  s.coeff_draw = cfg.optimizer.coeff_draw;
  s.init_scale = cfg.optimizer.init_scale;
  s.channel = cfg.channel;
  s.censoring = cfg.censoring;
  s.attacks = cfg.attacks;
  s.screening = cfg.screening;
  s.failures = cfg.failures;
  s.seed = cfg.seed;
  return s;
}

SwarmSimulation::SwarmSimulation(SimulationConfig cfg, const Objective& objective)
    : cfg_(std::move(cfg)), objective_(objective) {
  const std::size_t dim = objective_.dim();
  workers_.reserve(static_cast<std::size_t>(cfg_.num_workers));
  for (int i = 0; i < cfg_.num_workers; ++i) {
    workers_.push_back(make_worker(i, dim, cfg_.init_scale, cfg_.seed));
  }
  byzantine_ = cfg_.attacks.attacker_ids(cfg_.num_workers, cfg_.seed);
  for (int id : byzantine_) workers_[static_cast<std::size_t>(id)].is_byzantine = true;
  failed_ = draw_failed_nodes(cfg_.failures, cfg_.num_workers, cfg_.seed);
  for (int i = 0; i < cfg_.num_workers; ++i) {
    if (!failed_[static_cast<std::size_t>(i)]) live_.push_back(i);
  }
  swarm_.w_global = ParamVector(dim, 0.0);
  if (cfg_.algorithm == Algorithm::fl) {
    // All workers restart from the global model each round; a zero start is a
    // symmetric saddle for the MLP (no weight gradient at all).
    RngStream rng(cfg_.seed, "init_global");
    for (double& x : swarm_.w_global) x = rng.uniform(-cfg_.init_scale, cfg_.init_scale);
  }
}

const RoundReport& SwarmSimulation::step() {
  if (done()) throw std::out_of_range("SwarmSimulation::step: all rounds completed");
  report_ = RoundReport{};
  report_.round = swarm_.round;
  report_.params = eval_schedule(cfg_.schedule, swarm_.round, cfg_.censoring);
  if (live_.empty()) {
    ++swarm_.round;
    return report_;
  }
  try {
    switch (cfg_.algorithm) {
      case Algorithm::dsl:
        step_dsl();
        break;
      case Algorithm::fl:
        step_fl();
        break;
      case Algorithm::pso:
        step_pso();
        break;
    }
  } catch (const NumericError& e) {
    throw NumericError("round " + std::to_string(report_.round) + ": " + e.what());
  }
  return report_;
}

std::optional<SwarmSimulation::Delivery> SwarmSimulation::transmit(std::span<const int> ids,
                                                   std::span<const ParamVector* const> models,
                                                   int attempt) {
  const int t = swarm_.round;
  std::vector<int> surviving = inject_failures(ids, cfg_.failures, failed_, cfg_.seed, t);
  if (surviving.empty()) return std::nullopt;

  const std::vector<double> gains = sample_gains(cfg_.channel, surviving, cfg_.seed, t);
  const ChannelRealization real = realize_channel(cfg_.channel, surviving, gains);
  if (real.num_included() == 0) return std::nullopt;

  std::vector<Contribution> contributions(real.size());
  for (std::size_t k = 0; k < real.size(); ++k) {
    const auto pos = static_cast<std::size_t>(
        std::find(ids.begin(), ids.end(), real.ids[k]) - ids.begin());
    contributions[k] = {models[pos], real.gains[k], real.powers[k], real.included[k] != 0};
  }
  RngStream noise(cfg_.seed, "ota_noise", static_cast<std::uint64_t>(t),
                  static_cast<std::uint64_t>(attempt));
  const double noise_var = cfg_.channel.is_ideal() ? 0.0 : cfg_.channel.noise_var;
  Delivery out{ota_aggregate(contributions, noise_var, noise), {}};
  for (std::size_t k = 0; k < real.size(); ++k) {
    if (real.included[k]) out.contributors.push_back(real.ids[k]);
  }
  swarm_.counters.ota_uses += 1;
  swarm_.counters.uplink_vectors += static_cast<std::uint64_t>(out.agg.s_eff);
  return out;
}

PsoCoeffs SwarmSimulation::draw_coeffs(int id, int t) const {
  const std::size_t dim = cfg_.coeff_draw == CoeffDraw::per_coordinate ? objective_.dim() : 0;
  return draw_pso_coeffs(cfg_.seed, id, t, cfg_.schedule.c1_max, cfg_.schedule.c2_max, dim);
}

void SwarmSimulation::step_dsl() {
  const int t = swarm_.round;
  const RoundParams& rp = report_.params;
  const ParamVector w_prev = swarm_.w_global;
  const ScoreFn score = [this](const ParamVector& w) { return objective_.score(w); };

  for (int id : live_) {
    auto& worker = workers_[static_cast<std::size_t>(id)];
    const PsoCoeffs coeffs = draw_coeffs(id, t);
    const GradientFn gradient = [&](const ParamVector& w) {
      return objective_.local_gradient(id, t, w, w_prev);
    };
    worker = dsl_step(worker, rp, coeffs, w_prev, cfg_.schedule.alpha, gradient,
                      cfg_.velocity_rule);
    worker = update_local_best(std::move(worker), score);
  }

  // Score reports; Byzantine workers prepare their (possibly falsified)
  // transmission now because a lying score must influence selection.
  std::vector<ScoreReport> reports;
  reports.reserve(live_.size());
  std::vector<std::optional<Transmission>> poisoned(workers_.size());
  std::vector<double> reported(workers_.size(), 0.0);
  for (int id : live_) {
    auto& worker = workers_[static_cast<std::size_t>(id)];
    double f = worker.f_best;
    if (worker.is_byzantine) {
      RngStream rng(cfg_.seed, "attack", static_cast<std::uint64_t>(id),
                    static_cast<std::uint64_t>(t));
      poisoned[static_cast<std::size_t>(id)] = apply_attack(cfg_.attacks, worker.w_best, f, rng);
      f = poisoned[static_cast<std::size_t>(id)]->reported_f;
    }
    const ScoreReport r = censor_report(worker, f, rp.censor_threshold_t);
    if (r.fresh) swarm_.counters.uplink_scalars += 1;
    reported[static_cast<std::size_t>(id)] = r.reported_f;
    reports.push_back(r);
  }

  std::vector<int> selected = select_workers(reports, rp.s_t);
  report_.selected = selected;
  swarm_.selected = selected;

  std::vector<int> excluded;
  for (int attempt = 0; attempt <= cfg_.screening.max_retries; ++attempt) {
    std::vector<const ParamVector*> models;
    models.reserve(selected.size());
    for (int id : selected) {
      const auto k = static_cast<std::size_t>(id);
      models.push_back(poisoned[k] ? &poisoned[k]->w : &workers_[k].w_best);
    }
    const auto delivery = transmit(selected, models, attempt);
    if (!delivery) break;
    const OtaResult& agg = delivery->agg;

    // Compare against the scores of the workers that actually contributed.
    std::vector<double> contributed;
    for (int id : delivery->contributors) contributed.push_back(reported[static_cast<std::size_t>(id)]);
    const ScreenResult screen =
        screen_aggregate(agg.w_global, contributed, score, cfg_.screening);
    report_.screens.push_back(screen);
    if (screen.verdict == ScreenVerdict::accept) {
      swarm_.w_global = agg.w_global;
      swarm_.selected = selected;
      report_.s_eff = agg.s_eff;
      report_.carried_over = false;
      break;
    }
    swarm_.counters.rejected += 1;
    excluded.insert(excluded.end(), selected.begin(), selected.end());
    if (attempt == cfg_.screening.max_retries) break;
    selected = next_best(reports, excluded, rp.s_t);
    if (selected.empty()) break;
  }
  swarm_.round = t + 1;
}

void SwarmSimulation::step_fl() {
  const int t = swarm_.round;
  std::vector<WorkerState> live;
  live.reserve(live_.size());
  for (int id : live_) live.push_back(std::move(workers_[static_cast<std::size_t>(id)]));

  const Aggregator aggregate = [&](std::span<const int> ids, std::span<const ParamVector> models,
                                   CommCounters&) -> std::optional<ParamVector> {
    std::vector<ParamVector> sent(models.begin(), models.end());
    std::vector<const ParamVector*> ptrs;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (std::binary_search(byzantine_.begin(), byzantine_.end(), ids[k])) {
        RngStream rng(cfg_.seed, "attack", static_cast<std::uint64_t>(ids[k]),
                      static_cast<std::uint64_t>(t));
        sent[k] = apply_attack(cfg_.attacks, sent[k], 0.0, rng).w;
      }
      ptrs.push_back(&sent[k]);
    }
    auto delivery = transmit(ids, ptrs, 0);
    if (!delivery) return std::nullopt;
    report_.s_eff = delivery->agg.s_eff;
    report_.carried_over = false;
    return delivery->agg.w_global;
  };

  SwarmState next = fl_round(live, swarm_, cfg_.schedule.alpha, objective_, aggregate);
  // transmit() accounted traffic on swarm_; keep it.
  next.counters = swarm_.counters;
  swarm_ = std::move(next);
  report_.selected = swarm_.selected;

  const ScoreFn score = [this](const ParamVector& w) { return objective_.score(w); };
  for (auto& worker : live) {
    worker = update_local_best(std::move(worker), score);
    const auto id = static_cast<std::size_t>(worker.id);
    workers_[id] = std::move(worker);
  }
}

void SwarmSimulation::step_pso() {
  const int t = swarm_.round;
  std::vector<WorkerState> live;
  std::vector<PsoCoeffs> coeffs;
  live.reserve(live_.size());
  for (int id : live_) {
    live.push_back(std::move(workers_[static_cast<std::size_t>(id)]));
    coeffs.push_back(draw_coeffs(id, t));
  }
  const ScoreFn score = [this](const ParamVector& w) { return objective_.score(w); };
  SwarmState next = pso_round(live, swarm_, report_.params, coeffs, score);
  next.counters.uplink_scalars += live.size();
  next.counters.uplink_vectors += 1;
  swarm_ = std::move(next);
  report_.selected = swarm_.selected;
  report_.s_eff = 1;
  report_.carried_over = false;
  for (auto& p : live) {
    const auto id = static_cast<std::size_t>(p.id);
    workers_[id] = std::move(p);
  }
}

}  // namespace dsl
