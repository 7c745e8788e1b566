#pragma once

#include <stdexcept>
#include <string>

namespace dsl {

// Invalid configuration or precondition on user-supplied parameters. The
// message names the offending key where one exists.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A NaN/Inf appeared where every value must stay finite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched vector or feature dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Over-the-air aggregation with zero included contributions.
class AggregationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dsl
