#pragma once

// Hand-rolled property testing: run a check over many cases, each with its
// own keyed RNG stream so a failing case can be replayed from its index.

#include <cstdint>
#include <string>

#include <gtest/gtest.h>

#include "dsl/data.hpp"
#include "dsl/param_vector.hpp"
#include "dsl/rng.hpp"

namespace dsl::testing {

template <typename Check>
void for_all(const char* name, int cases, Check&& check) {
  for (int i = 0; i < cases; ++i) {
    RngStream rng(0x5eed, name, static_cast<std::uint64_t>(i));
    SCOPED_TRACE(std::string(name) + " case " + std::to_string(i));
    check(rng);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

inline ParamVector gen_vector(RngStream& rng, std::size_t dim, double scale = 1.0) {
  ParamVector v(dim);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

inline std::size_t gen_size(RngStream& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.index(hi - lo + 1);
}

inline Dataset gen_dataset(RngStream& rng, std::size_t n, std::size_t dim, int classes) {
  Dataset ds(dim, classes);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x) v = rng.normal();
    ds.add(x, static_cast<int>(rng.index(static_cast<std::size_t>(classes))));
  }
  return ds;
}

}  // namespace dsl::testing
