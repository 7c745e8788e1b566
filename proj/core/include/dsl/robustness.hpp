#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsl/optimizer.hpp"
#include "dsl/rng.hpp"

namespace dsl {

enum class AttackKind { none, sign_flip, gaussian_noise, score_lying };

struct AttackSpec {
  AttackKind kind = AttackKind::none;
  int num_attackers = 0;
  double magnitude = 1.0;
  bool randomize_ids = false;  // default: the lowest worker ids attack

  void validate(int num_workers) const;
  // Sorted attacker ids; random choice uses stream (seed, "attackers").
  std::vector<int> attacker_ids(int num_workers, std::uint64_t seed) const;
};

struct Transmission {
  ParamVector w;
  double reported_f = 0.0;
};

//   sign_flip:      w -> -magnitude * w, honest score
//   gaussian_noise: w -> w + N(0, magnitude^2 I), honest score
//   score_lying:    gaussian_noise perturbation and a reported score of 0
//   none:           unchanged
Transmission apply_attack(const AttackSpec& spec, const ParamVector& true_w, double true_f,
                          RngStream& rng);

struct ScreeningPolicy {
  bool enabled = false;
  double tau = 1.0;
  bool auto_tau = false;  // calibrate tau from an attack-free pilot
  int max_retries = 3;

  void validate() const;
};

enum class ScreenVerdict { accept, reject };

struct ScreenResult {
  ScreenVerdict verdict = ScreenVerdict::accept;
  double f_aggregate = 0.0;
  double mean_report = 0.0;
  double deviation = 0.0;  // |f_aggregate - mean_report|
};

// Scores the candidate aggregate and accepts iff its deviation from the mean
// reported score is <= tau. A disabled policy always accepts (the score is
// still computed and reported).
ScreenResult screen_aggregate(const ParamVector& candidate, std::span<const double> reports,
                              const ScoreFn& score, const ScreeningPolicy& policy);

struct FailureSpec {
  double link_drop_prob = 0.0;  // per selected worker per round
  double node_fail_prob = 0.0;  // per worker, once per run

  void validate() const;
};

// Permanent failures, decided before round 0 from streams (seed, "node_fail", id).
std::vector<char> draw_failed_nodes(const FailureSpec& spec, int num_workers, std::uint64_t seed);

// Removes permanently failed workers, then drops each survivor independently
// with link_drop_prob using stream (seed, "link", id, round). Order preserved.
std::vector<int> inject_failures(std::span<const int> selected, const FailureSpec& spec,
                                 std::span<const char> failed_nodes, std::uint64_t seed,
                                 int round);

}  // namespace dsl
