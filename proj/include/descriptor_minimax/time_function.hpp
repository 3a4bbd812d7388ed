#pragma once

#include <vector>

#include "descriptor_minimax/linalg.hpp"

namespace dminimax {

/// Matrix-valued function of time. Three forms:
///   constant    A(t) = A
///   table       A(t) = values[i] for the last times[i] <= t (piecewise constant)
///   polynomial  A(t) = sum_j coefficients[j] t^j
class TimeFunction {
 public:
  enum class Kind { constant, table, polynomial };

  TimeFunction() = default;
  TimeFunction(Matrix<double> value);  // NOLINT: implicit from a constant matrix

  static TimeFunction constant(Matrix<double> value);
  static TimeFunction table(std::vector<double> times, std::vector<Matrix<double>> values);
  static TimeFunction polynomial(std::vector<Matrix<double>> coefficients);

  Matrix<double> operator()(double t) const;
  Vector<double> vector_at(double t) const;

  Kind kind() const { return kind_; }
  Index rows() const;
  Index cols() const;
  bool empty() const { return values_.empty(); }

  const std::vector<double>& times() const { return times_; }
  const std::vector<Matrix<double>>& values() const { return values_; }

  friend bool operator==(const TimeFunction& a, const TimeFunction& b);

 private:
  Kind kind_{Kind::constant};
  std::vector<double> times_;
  std::vector<Matrix<double>> values_;  // constant: one value; table: one per time; polynomial: coefficients
};

}  // namespace dminimax
