#pragma once

#include <span>
#include <vector>

#include "dsl/optimizer.hpp"

namespace dsl {

struct ScoreReport {
  int worker = 0;
  double reported_f = 0.0;
  bool fresh = false;  // transmitted this round; otherwise the stored value is reused
};

// Transmits f_current when the worker has never reported, when the threshold
// is zero, or when |f_current - last_reported_f| > threshold; otherwise the
// server reuses the last transmitted value. Updates the worker's censoring
// memory on transmission.
ScoreReport censor_report(WorkerState& worker, double f_current, double threshold);

// The min(s_t, reports.size()) workers with the smallest reported scores,
// ordered by (reported_f, worker id). Throws ConfigError on an empty list or
// s_t < 1.
std::vector<int> select_workers(std::span<const ScoreReport> reports, int s_t);

// The k lowest-score workers outside `excluded`, same ordering as
// select_workers. Returns fewer (possibly none) if not enough remain.
std::vector<int> next_best(std::span<const ScoreReport> reports, std::span<const int> excluded,
                           int k);

}  // namespace dsl
