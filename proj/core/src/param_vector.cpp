#include "dsl/param_vector.hpp"

#include <cmath>
#include <sstream>

#include "dsl/error.hpp"

namespace dsl {

void require_same_dim(const ParamVector& a, const ParamVector& b, std::string_view what) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a.size() << " vs " << b.size() << ")";
    throw DimensionError(os.str());
  }
}

ParamVector& ParamVector::operator+=(const ParamVector& other) {
  require_same_dim(*this, other, "ParamVector +=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ParamVector& ParamVector::operator-=(const ParamVector& other) {
  require_same_dim(*this, other, "ParamVector -=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ParamVector& ParamVector::operator*=(double scale) {
  for (double& x : values_) x *= scale;
  return *this;
}

ParamVector& ParamVector::axpy(double scale, const ParamVector& other) {
  require_same_dim(*this, other, "ParamVector axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += scale * other.values_[i];
  return *this;
}

double ParamVector::dot(const ParamVector& other) const {
  require_same_dim(*this, other, "ParamVector dot");
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * other.values_[i];
  return s;
}

double ParamVector::squared_norm() const {
  double s = 0.0;
  for (double x : values_) s += x * x;
  return s;
}

double ParamVector::norm() const { return std::sqrt(squared_norm()); }

bool ParamVector::all_finite() const {
  for (double x : values_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void ParamVector::require_finite(std::string_view context) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream os;
      os << context << ": non-finite entry at index " << i << " (" << values_[i] << ")";
      throw NumericError(os.str());
    }
  }
}

ParamVector operator+(ParamVector lhs, const ParamVector& rhs) { return lhs += rhs; }
ParamVector operator-(ParamVector lhs, const ParamVector& rhs) { return lhs -= rhs; }
ParamVector operator*(double scale, ParamVector v) { return v *= scale; }
ParamVector operator-(ParamVector v) {
  for (double& x : v) x = -x;
  return v;
}

double distance(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double max_abs_diff(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace dsl
