#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dsl/data.hpp"
#include "dsl/model.hpp"
#include "dsl/param_vector.hpp"
#include "dsl/schedule.hpp"

namespace dsl {

// What a worker stores for its velocity after a step. bi_displacement keeps
// only the swarm (inertia + personal + social) part, so lambda = 1 reduces to
// textbook PSO; total_displacement stores the full applied move w' - w.
enum class VelocityRule { bi_displacement, total_displacement };

struct WorkerState {
  int id = 0;
  ParamVector w;
  ParamVector v;
  ParamVector w_best;
  double f_best = std::numeric_limits<double>::infinity();
  std::optional<double> last_reported_f;  // censoring memory
  std::shared_ptr<const Dataset> data;    // effective training set
  bool is_byzantine = false;
};

struct CommCounters {
  std::uint64_t uplink_scalars = 0;
  std::uint64_t uplink_vectors = 0;
  std::uint64_t ota_uses = 0;
  std::uint64_t rejected = 0;

  bool operator==(const CommCounters&) const = default;
};

struct SwarmState {
  ParamVector w_global;
  int round = 0;
  std::vector<int> selected;
  CommCounters counters;
};

using GradientFn = std::function<ParamVector(const ParamVector&)>;
using ScoreFn = std::function<double(const ParamVector&)>;

// The learning problem as seen by the swarm: each worker's local gradient
// (its own minibatch for the given round, optionally pulled toward `anchor`)
// and a fair-value score common to all workers.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dim() const = 0;
  virtual ParamVector local_gradient(int worker, int round, const ParamVector& w,
                                     const ParamVector& anchor) const = 0;
  virtual double score(const ParamVector& w) const = 0;
};

// ||w - center||^2, identical for every worker.
class SphereObjective final : public Objective {
 public:
  explicit SphereObjective(ParamVector center) : center_(std::move(center)) {}
  std::size_t dim() const override { return center_.size(); }
  ParamVector local_gradient(int worker, int round, const ParamVector& w,
                             const ParamVector& anchor) const override;
  double score(const ParamVector& w) const override;
  const ParamVector& center() const { return center_; }

 private:
  ParamVector center_;
};

// w ~ U(-init_scale, init_scale) per coordinate from stream (seed, "init", id);
// zero velocity; w_best = w; f_best = +inf.
WorkerState make_worker(int id, std::size_t dim, double init_scale, std::uint64_t seed);

// One hybrid update:
//   bi = c0 v + c1 (w_best - w) + c2 (w_global - w)
//   w' = w + lambda bi - (1 - lambda) alpha grad(w)
// The gradient is not evaluated when lambda == 1. Throws NumericError naming
// the worker and the norms involved if the result is not finite.
WorkerState dsl_step(const WorkerState& worker, const RoundParams& rp, const PsoCoeffs& coeffs,
                     const ParamVector& w_global, double alpha, const GradientFn& gradient,
                     VelocityRule rule = VelocityRule::bi_displacement);

// w - alpha * g, the arithmetic shared by every gradient path.
ParamVector sgd_step(const ParamVector& w, double alpha, const ParamVector& g);

// Replaces (w_best, f_best) with (w, score(w)) iff score(w) < f_best.
WorkerState update_local_best(WorkerState worker, const ScoreFn& score);
WorkerState update_local_best(WorkerState worker, const ModelSpec& spec,
                              const Dataset& score_data);

// Combines (worker id, model) pairs into a new global model. nullopt means the
// aggregate is unavailable this round and the previous global model carries
// over. Implementations account their own traffic in `counters`.
using Aggregator = std::function<std::optional<ParamVector>(
    std::span<const int> ids, std::span<const ParamVector> models, CommCounters& counters)>;

// Noise-free arithmetic mean; one uplink vector per contribution.
std::optional<ParamVector> ideal_mean(std::span<const int> ids,
                                      std::span<const ParamVector> models,
                                      CommCounters& counters);

// Federated averaging with a single local SGD step: every worker starts at
// the current global model, steps on its own minibatch, the aggregate becomes
// the new global model and is broadcast back to all workers.
SwarmState fl_round(std::vector<WorkerState>& workers, const SwarmState& swarm, double alpha,
                    const Objective& objective, const Aggregator& aggregate);

// Classic PSO on a common objective:
//   v' = c0 v + c1 (w_best - w) + c2 (w_global - w),  w' = w + v'
// then personal bests and the swarm best (lowest f_best, lowest id on ties).
// coeffs[k] belongs to particles[k].
SwarmState pso_round(std::vector<WorkerState>& particles, const SwarmState& swarm,
                     const RoundParams& rp, std::span<const PsoCoeffs> coeffs,
                     const ScoreFn& objective);

}  // namespace dsl
