#pragma once

#include <cstddef>
#include <vector>

#include "dsl/rng.hpp"

namespace dsl {

// Hyperparameters of the hybrid update and their per-round schedules. All
// interpolated quantities move linearly from *_init at t = 0 to *_final at
// t = T - 1; equal endpoints give a constant schedule (lambda = 0 is pure
// gradient descent, lambda = 1 pure swarm motion).
struct HyperSchedule {
  double lambda_init = 0.8;
  double lambda_final = 0.2;
  double c0_init = 0.9;
  double c0_final = 0.4;
  double c1_max = 1.0;
  double c2_max = 1.0;
  double alpha = 0.1;  // SGD step size
  double mu = 0.0;     // proximal weight toward the previous global model
  int s_init = 1;
  int s_final = 1;
  int rounds_total = 1;

  // Throws ConfigError naming the first offending field.
  void validate(int num_workers) const;
};

// Communication-censoring threshold: threshold_init * decay^t.
struct CensorPolicy {
  bool enabled = false;
  double threshold_init = 0.0;
  double decay = 1.0;

  double threshold_at(int t) const;
  void validate() const;
};

struct RoundParams {
  double lambda_t = 0.0;
  double c0_t = 0.0;
  int s_t = 1;
  double censor_threshold_t = 0.0;

  bool operator==(const RoundParams&) const = default;
};

// Throws std::out_of_range unless 0 <= t < rounds_total. A disabled censor
// policy yields threshold 0 (every report transmitted).
RoundParams eval_schedule(const HyperSchedule& schedule, int t,
                          const CensorPolicy& censor = {});

// Scalar draws multiply whole difference vectors. Per-coordinate draws give
// every coordinate its own pair, which keeps the swarm from collapsing onto
// the low-dimensional span of its initial spread.
enum class CoeffDraw { scalar, per_coordinate };

struct PsoCoeffs {
  double c1 = 0.0;
  double c2 = 0.0;
  // Non-empty in per-coordinate mode; then these replace c1 and c2.
  std::vector<double> c1_coord;
  std::vector<double> c2_coord;

  bool per_coordinate() const { return !c1_coord.empty(); }
};

// c1 ~ U(0, c1_max], c2 ~ U(0, c2_max]. dim = 0 draws one scalar pair,
// otherwise dim pairs (c1_k, c2_k) in coordinate order.
PsoCoeffs draw_pso_coeffs(RngStream& rng, double c1_max, double c2_max, std::size_t dim = 0);

// The stream draw_pso_coeffs is keyed on inside the round loop:
// (seed, "pso_coeffs", worker, round).
PsoCoeffs draw_pso_coeffs(std::uint64_t seed, int worker, int round, double c1_max,
                          double c2_max, std::size_t dim = 0);

}  // namespace dsl
