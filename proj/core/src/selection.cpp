#include "dsl/selection.hpp"

#include <algorithm>
#include <cmath>

#include "dsl/error.hpp"

namespace dsl {

ScoreReport censor_report(WorkerState& worker, double f_current, double threshold) {
  if (!std::isfinite(f_current)) {
    throw NumericError("censor_report: non-finite score for worker " + std::to_string(worker.id));
  }
  const bool transmit = !worker.last_reported_f.has_value() || threshold <= 0.0 ||
                        std::abs(f_current - *worker.last_reported_f) > threshold;
  if (transmit) {
    worker.last_reported_f = f_current;
    return {worker.id, f_current, true};
  }
  return {worker.id, *worker.last_reported_f, false};
}

namespace {

std::vector<const ScoreReport*> ranked(std::span<const ScoreReport> reports,
                                       std::span<const int> excluded) {
  std::vector<const ScoreReport*> order;
  order.reserve(reports.size());
  for (const auto& r : reports) {
    if (std::find(excluded.begin(), excluded.end(), r.worker) == excluded.end()) {
      order.push_back(&r);
    }
  }
  std::sort(order.begin(), order.end(), [](const ScoreReport* a, const ScoreReport* b) {
    if (a->reported_f != b->reported_f) return a->reported_f < b->reported_f;
    return a->worker < b->worker;
  });
  return order;
}

std::vector<int> take(const std::vector<const ScoreReport*>& order, int k) {
  const auto n = std::min(order.size(), static_cast<std::size_t>(std::max(k, 0)));
  std::vector<int> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(order[i]->worker);
  return ids;
}

}  // namespace

std::vector<int> select_workers(std::span<const ScoreReport> reports, int s_t) {
  if (reports.empty()) throw ConfigError("select_workers: no reports");
  if (s_t < 1) throw ConfigError("select_workers: s_t must be >= 1");
  return take(ranked(reports, {}), s_t);
}

std::vector<int> next_best(std::span<const ScoreReport> reports, std::span<const int> excluded,
                           int k) {
  if (k < 1) throw ConfigError("next_best: k must be >= 1");
  return take(ranked(reports, excluded), k);
}

}  // namespace dsl
