#include "dsl/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dsl/error.hpp"

namespace dsl {
namespace {

// (1 - f) * a + f * b reproduces both endpoints exactly.
double lerp_exact(double a, double b, double f) { return (1.0 - f) * a + f * b; }

void check(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(std::string("schedules.") + key + ": " + what);
}

}  // namespace

void HyperSchedule::validate(int num_workers) const {
  check(lambda_init >= 0.0 && lambda_init <= 1.0, "lambda_init", "must be in [0, 1]");
  check(lambda_final >= 0.0 && lambda_final <= 1.0, "lambda_final", "must be in [0, 1]");
  check(c0_init > 0.0, "c0_init", "must be > 0");
  check(c0_final > 0.0, "c0_final", "must be > 0");
  check(c1_max > 0.0, "c1_max", "must be > 0");
  check(c2_max > 0.0, "c2_max", "must be > 0");
  check(alpha > 0.0, "alpha", "must be > 0");
  check(mu >= 0.0, "mu", "must be >= 0");
  check(rounds_total > 0, "rounds_total", "must be > 0");
  check(s_init >= 1, "s_init", "must be >= 1");
  check(s_init <= s_final, "s_final", "must be >= s_init");
  check(s_final <= num_workers, "s_final", "must be <= num_workers");
}

double CensorPolicy::threshold_at(int t) const {
  if (!enabled) return 0.0;
  return threshold_init * std::pow(decay, t);
}

void CensorPolicy::validate() const {
  if (!(threshold_init >= 0.0))
    throw ConfigError("censoring.threshold_init: must be >= 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("censoring.decay: must be in (0, 1]");
}

RoundParams eval_schedule(const HyperSchedule& schedule, int t, const CensorPolicy& censor) {
  if (t < 0 || t >= schedule.rounds_total) {
    throw std::out_of_range("eval_schedule: round " + std::to_string(t) + " outside [0, " +
                            std::to_string(schedule.rounds_total) + ")");
  }
  const double f = schedule.rounds_total == 1
                       ? 0.0
                       : static_cast<double>(t) / static_cast<double>(schedule.rounds_total - 1);
  RoundParams rp;
  rp.lambda_t = std::clamp(lerp_exact(schedule.lambda_init, schedule.lambda_final, f), 0.0, 1.0);
  rp.c0_t = lerp_exact(schedule.c0_init, schedule.c0_final, f);
  const double s = lerp_exact(schedule.s_init, schedule.s_final, f);
  rp.s_t = std::clamp(static_cast<int>(std::lround(s)), schedule.s_init, schedule.s_final);
  rp.censor_threshold_t = censor.threshold_at(t);
  return rp;
}

PsoCoeffs draw_pso_coeffs(RngStream& rng, double c1_max, double c2_max, std::size_t dim) {
  PsoCoeffs c;
  if (dim == 0) {
    c.c1 = c1_max * rng.uniform_open_zero();
    c.c2 = c2_max * rng.uniform_open_zero();
    return c;
  }
  c.c1_coord.resize(dim);
  c.c2_coord.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    c.c1_coord[k] = c1_max * rng.uniform_open_zero();
    c.c2_coord[k] = c2_max * rng.uniform_open_zero();
  }
  return c;
}

PsoCoeffs draw_pso_coeffs(std::uint64_t seed, int worker, int round, double c1_max,
                          double c2_max, std::size_t dim) {
  RngStream rng(seed, "pso_coeffs", static_cast<std::uint64_t>(worker),
                static_cast<std::uint64_t>(round));
  return draw_pso_coeffs(rng, c1_max, c2_max, dim);
}

}  // namespace dsl
