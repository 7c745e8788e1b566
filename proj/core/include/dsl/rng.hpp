#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace dsl {

// Keyed random stream. A stream is identified by (master seed, label, a, b),
// where a and b are typically a worker id and a round index. Distinct keys
// give independent streams, and the same key always replays the same draws,
// so the order in which workers are evaluated never changes results.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view label,
            std::uint64_t a = 0, std::uint64_t b = 0);

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open_zero() { return 1.0 - uniform(); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal(double mean = 0.0, double stddev = 1.0);
  double gamma(double shape);
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

  static std::uint64_t derive_key(std::uint64_t master_seed, std::string_view label,
                                  std::uint64_t a, std::uint64_t b);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dsl
