#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace dsl {

// Flat real-valued parameter (or velocity) vector of fixed dimension.
//
// All binary arithmetic requires equal lengths and throws DimensionError
// otherwise. Finiteness is enforced at module boundaries through
// require_finite(), which throws NumericError with the caller's context.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  ParamVector(std::initializer_list<double> values) : values_(values) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& raw() const { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  ParamVector& operator+=(const ParamVector& other);
  ParamVector& operator-=(const ParamVector& other);
  ParamVector& operator*=(double scale);

  // this += scale * other
  ParamVector& axpy(double scale, const ParamVector& other);

  double dot(const ParamVector& other) const;
  double norm() const;
  double squared_norm() const;

  bool all_finite() const;
  void require_finite(std::string_view context) const;

  bool operator==(const ParamVector& other) const = default;

 private:
  std::vector<double> values_;
};

ParamVector operator+(ParamVector lhs, const ParamVector& rhs);
ParamVector operator-(ParamVector lhs, const ParamVector& rhs);
ParamVector operator*(double scale, ParamVector v);
ParamVector operator-(ParamVector v);

double distance(const ParamVector& a, const ParamVector& b);
double max_abs_diff(const ParamVector& a, const ParamVector& b);

void require_same_dim(const ParamVector& a, const ParamVector& b, std::string_view what);

}  // namespace dsl
