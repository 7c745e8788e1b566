#include "dsl/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsl/error.hpp"

namespace dsl {

void AttackSpec::validate(int num_workers) const {
  if (num_attackers < 0) throw ConfigError("attacks.num_attackers: must be >= 0");
  if (num_attackers > num_workers)
    throw ConfigError("attacks.num_attackers: must be <= num_workers");
  if (!(magnitude > 0.0)) throw ConfigError("attacks.magnitude: must be > 0");
}

std::vector<int> AttackSpec::attacker_ids(int num_workers, std::uint64_t seed) const {
  if (kind == AttackKind::none || num_attackers == 0) return {};
  std::vector<int> ids(static_cast<std::size_t>(num_workers));
  std::iota(ids.begin(), ids.end(), 0);
  if (randomize_ids) {
    RngStream rng(seed, "attackers");
    std::shuffle(ids.begin(), ids.end(), rng.engine());
  }
  ids.resize(static_cast<std::size_t>(num_attackers));
  std::sort(ids.begin(), ids.end());
  return ids;
}

Transmission apply_attack(const AttackSpec& spec, const ParamVector& true_w, double true_f,
                          RngStream& rng) {
  Transmission out{true_w, true_f};
  switch (spec.kind) {
    case AttackKind::none:
      break;
    case AttackKind::sign_flip:
      out.w *= -spec.magnitude;
      break;
    case AttackKind::gaussian_noise:
    case AttackKind::score_lying:
      for (double& x : out.w) x += rng.normal(0.0, spec.magnitude);
      if (spec.kind == AttackKind::score_lying) out.reported_f = 0.0;
      break;
  }
  return out;
}

void ScreeningPolicy::validate() const {
  if (!auto_tau && !(tau >= 0.0)) throw ConfigError("screening.tau: must be >= 0");
  if (max_retries < 0) throw ConfigError("screening.max_retries: must be >= 0");
}

ScreenResult screen_aggregate(const ParamVector& candidate, std::span<const double> reports,
                              const ScoreFn& score, const ScreeningPolicy& policy) {
  ScreenResult r;
  r.f_aggregate = score(candidate);
  if (!reports.empty()) {
    r.mean_report =
        std::accumulate(reports.begin(), reports.end(), 0.0) / static_cast<double>(reports.size());
  }
  r.deviation = std::abs(r.f_aggregate - r.mean_report);
  // A non-finite score always counts as contaminated.
  const bool ok = std::isfinite(r.deviation) && r.deviation <= policy.tau;
  r.verdict = !policy.enabled || ok ? ScreenVerdict::accept : ScreenVerdict::reject;
  return r;
}

void FailureSpec::validate() const {
  if (!(link_drop_prob >= 0.0 && link_drop_prob <= 1.0))
    throw ConfigError("failures.link_drop_prob: must be in [0, 1]");
  if (!(node_fail_prob >= 0.0 && node_fail_prob <= 1.0))
    throw ConfigError("failures.node_fail_prob: must be in [0, 1]");
}

std::vector<char> draw_failed_nodes(const FailureSpec& spec, int num_workers, std::uint64_t seed) {
  std::vector<char> failed(static_cast<std::size_t>(num_workers), 0);
  if (spec.node_fail_prob <= 0.0) return failed;
  for (int i = 0; i < num_workers; ++i) {
    RngStream rng(seed, "node_fail", static_cast<std::uint64_t>(i));
    failed[static_cast<std::size_t>(i)] = rng.bernoulli(spec.node_fail_prob) ? 1 : 0;
  }
  return failed;
}

std::vector<int> inject_failures(std::span<const int> selected, const FailureSpec& spec,
                                 std::span<const char> failed_nodes, std::uint64_t seed,
                                 int round) {
  std::vector<int> surviving;
  surviving.reserve(selected.size());
  for (int id : selected) {
    const auto k = static_cast<std::size_t>(id);
    if (k < failed_nodes.size() && failed_nodes[k]) continue;
    if (spec.link_drop_prob > 0.0) {
      RngStream rng(seed, "link", k, static_cast<std::uint64_t>(round));
      if (rng.bernoulli(spec.link_drop_prob)) continue;
    }
    surviving.push_back(id);
  }
  return surviving;
}

}  // namespace dsl
