#include "dsl/optimizer.hpp"

#include <sstream>

#include "dsl/error.hpp"

namespace dsl {

ParamVector SphereObjective::local_gradient(int, int, const ParamVector& w,
                                            const ParamVector&) const {
  ParamVector g = w - center_;
  g *= 2.0;
  return g;
}

double SphereObjective::score(const ParamVector& w) const {
  const double d = distance(w, center_);
  return d * d;
}

WorkerState make_worker(int id, std::size_t dim, double init_scale, std::uint64_t seed) {
  RngStream rng(seed, "init", static_cast<std::uint64_t>(id));
  WorkerState s;
  s.id = id;
  s.w = ParamVector(dim);
  for (double& x : s.w) x = rng.uniform(-init_scale, init_scale);
  s.v = ParamVector(dim, 0.0);
  s.w_best = s.w;
  return s;
}

namespace {

ParamVector swarm_displacement(const WorkerState& worker, double c0, const PsoCoeffs& coeffs,
                               const ParamVector& w_global) {
  ParamVector bi = c0 * worker.v;
  if (!coeffs.per_coordinate()) {
    bi.axpy(coeffs.c1, worker.w_best - worker.w);
    bi.axpy(coeffs.c2, w_global - worker.w);
    return bi;
  }
  if (coeffs.c1_coord.size() != bi.size() || coeffs.c2_coord.size() != bi.size()) {
    throw DimensionError("swarm_displacement: coefficient count does not match dimension");
  }
  for (std::size_t k = 0; k < bi.size(); ++k) {
    bi[k] += coeffs.c1_coord[k] * (worker.w_best[k] - worker.w[k]) +
             coeffs.c2_coord[k] * (w_global[k] - worker.w[k]);
  }
  return bi;
}

}  // namespace

ParamVector sgd_step(const ParamVector& w, double alpha, const ParamVector& g) {
  ParamVector out = w;
  out.axpy(-1.0, alpha * g);
  return out;
}

WorkerState dsl_step(const WorkerState& worker, const RoundParams& rp, const PsoCoeffs& coeffs,
                     const ParamVector& w_global, double alpha, const GradientFn& gradient,
                     VelocityRule rule) {
  require_same_dim(worker.w, worker.v, "dsl_step velocity");
  require_same_dim(worker.w, worker.w_best, "dsl_step local best");
  require_same_dim(worker.w, w_global, "dsl_step global model");
  if (rp.lambda_t < 0.0 || rp.lambda_t > 1.0) {
    throw ConfigError("dsl_step: lambda_t outside [0, 1]");
  }

  const ParamVector bi = swarm_displacement(worker, rp.c0_t, coeffs, w_global);
  WorkerState next = worker;
  next.w.axpy(rp.lambda_t, bi);
  ParamVector ai;
  if (rp.lambda_t < 1.0) {
    ai = alpha * gradient(worker.w);
    next.w.axpy(-(1.0 - rp.lambda_t), ai);
  }
  next.v = rule == VelocityRule::bi_displacement ? bi : next.w - worker.w;

  if (!next.w.all_finite() || !next.v.all_finite()) {
    std::ostringstream os;
    os << "dsl_step: non-finite update for worker " << worker.id << " (|w|=" << worker.w.norm()
       << ", |v|=" << worker.v.norm() << ", |bi|=" << bi.norm()
       << ", |ai|=" << (ai.empty() ? 0.0 : ai.norm()) << ", |w_global|=" << w_global.norm()
       << ")";
    throw NumericError(os.str());
  }
  return next;
}

WorkerState update_local_best(WorkerState worker, const ScoreFn& score) {
  const double f = score(worker.w);
  if (f < worker.f_best) {
    worker.f_best = f;
    worker.w_best = worker.w;
  }
  return worker;
}

WorkerState update_local_best(WorkerState worker, const ModelSpec& spec,
                              const Dataset& score_data) {
  if (score_data.empty()) throw ConfigError("update_local_best: empty scoring set");
  return update_local_best(std::move(worker),
                           [&](const ParamVector& w) { return loss(spec, w, score_data); });
}

std::optional<ParamVector> ideal_mean(std::span<const int>, std::span<const ParamVector> models,
                                      CommCounters& counters) {
  if (models.empty()) return std::nullopt;
  ParamVector sum(models.front().size(), 0.0);
  for (const auto& m : models) sum += m;
  sum *= 1.0 / static_cast<double>(models.size());
  counters.uplink_vectors += models.size();
  return sum;
}

SwarmState fl_round(std::vector<WorkerState>& workers, const SwarmState& swarm, double alpha,
                    const Objective& objective, const Aggregator& aggregate) {
  std::vector<int> ids;
  std::vector<ParamVector> models;
  ids.reserve(workers.size());
  models.reserve(workers.size());
  for (auto& worker : workers) {
    worker.w = swarm.w_global;
    const ParamVector g =
        objective.local_gradient(worker.id, swarm.round, worker.w, swarm.w_global);
    worker.w = sgd_step(worker.w, alpha, g);
    worker.w.require_finite("fl_round worker " + std::to_string(worker.id));
    ids.push_back(worker.id);
    models.push_back(worker.w);
  }

  SwarmState next = swarm;
  next.selected = ids;
  if (auto agg = aggregate(ids, models, next.counters)) {
    agg->require_finite("fl_round aggregate");
    next.w_global = std::move(*agg);
  }
  for (auto& worker : workers) worker.w = next.w_global;
  next.round = swarm.round + 1;
  return next;
}

SwarmState pso_round(std::vector<WorkerState>& particles, const SwarmState& swarm,
                     const RoundParams& rp, std::span<const PsoCoeffs> coeffs,
                     const ScoreFn& objective) {
  if (coeffs.size() != particles.size()) {
    throw DimensionError("pso_round: one coefficient pair per particle required");
  }
  for (std::size_t k = 0; k < particles.size(); ++k) {
    auto& p = particles[k];
    const ParamVector v = swarm_displacement(p, rp.c0_t, coeffs[k], swarm.w_global);
    p.w.axpy(1.0, v);
    p.v = v;
    p.w.require_finite("pso_round particle " + std::to_string(p.id));
    p = update_local_best(std::move(p), objective);
  }

  SwarmState next = swarm;
  const WorkerState* best = nullptr;
  for (const auto& p : particles) {
    if (best == nullptr || p.f_best < best->f_best ||
        (p.f_best == best->f_best && p.id < best->id)) {
      best = &p;
    }
  }
  if (best != nullptr) {
    next.w_global = best->w_best;
    next.selected = {best->id};
  }
  next.round = swarm.round + 1;
  return next;
}

}  // namespace dsl
