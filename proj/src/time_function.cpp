#include "descriptor_minimax/time_function.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dminimax {

namespace {

void require_same_shape(const std::vector<Matrix<double>>& values, const char* what) {
  if (values.empty()) throw Error(ErrorKind::InvalidInput, std::string(what) + " needs at least one matrix");
  for (const auto& v : values) {
    if (v.rows() != values.front().rows() || v.cols() != values.front().cols()) {
      throw Error(ErrorKind::InvalidInput, std::string(what) + " entries must share one shape");
    }
    require_finite(v, what);
  }
}

}  // namespace

TimeFunction::TimeFunction(Matrix<double> value) : kind_(Kind::constant) {
  values_.push_back(std::move(value));
  require_same_shape(values_, "constant time function");
}

TimeFunction TimeFunction::constant(Matrix<double> value) { return TimeFunction(std::move(value)); }

TimeFunction TimeFunction::table(std::vector<double> times, std::vector<Matrix<double>> values) {
  require_same_shape(values, "table time function");
  if (times.size() != values.size()) {
    throw Error(ErrorKind::InvalidInput, "table time function needs one time per value");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw Error(ErrorKind::InvalidInput, "table times must be finite");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw Error(ErrorKind::InvalidInput, "table times must be strictly increasing");
    }
  }
  TimeFunction f;
  f.kind_ = Kind::table;
  f.times_ = std::move(times);
  f.values_ = std::move(values);
  return f;
}

TimeFunction TimeFunction::polynomial(std::vector<Matrix<double>> coefficients) {
  require_same_shape(coefficients, "polynomial time function");
  TimeFunction f;
  f.kind_ = Kind::polynomial;
  f.values_ = std::move(coefficients);
  return f;
}

Index TimeFunction::rows() const { return values_.empty() ? 0 : values_.front().rows(); }
Index TimeFunction::cols() const { return values_.empty() ? 0 : values_.front().cols(); }

Matrix<double> TimeFunction::operator()(double t) const {
  if (values_.empty()) throw Error(ErrorKind::InvalidInput, "evaluating an empty time function");
  switch (kind_) {
    case Kind::constant:
      return values_.front();
    case Kind::table: {
      // Nodes computed as a + k h can land a rounding error below a table time.
      const double slack = 1e-12 * (1.0 + std::abs(t));
      const auto it = std::upper_bound(times_.begin(), times_.end(), t + slack);
      if (it == times_.begin()) return values_.front();
      return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
    }
    case Kind::polynomial: {
      Matrix<double> acc = values_.back();
      for (auto it = values_.rbegin() + 1; it != values_.rend(); ++it) acc = acc * t + *it;
      return acc;
    }
  }
  return values_.front();
}

Vector<double> TimeFunction::vector_at(double t) const {
  const Matrix<double> v = (*this)(t);
  if (v.cols() != 1) throw Error(ErrorKind::InvalidInput, "time function is not vector-valued");
  return v.col(0);
}

bool operator==(const TimeFunction& a, const TimeFunction& b) {
  if (a.kind_ != b.kind_ || a.times_ != b.times_ || a.values_.size() != b.values_.size()) return false;
  for (std::size_t i = 0; i < a.values_.size(); ++i) {
    if (a.values_[i].rows() != b.values_[i].rows() || a.values_[i].cols() != b.values_[i].cols()) return false;
    if (a.values_[i] != b.values_[i]) return false;
  }
  return true;
}

}  // namespace dminimax
