#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>

#include "alphadisc/types.hpp"

namespace alphadisc::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// log(sum exp(v)); -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> v) {
  double hi = -kInf;
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

inline std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

/// Rethrows the in-flight library error with `context` appended, keeping its
/// dynamic type for the error classes callers dispatch on.
[[noreturn]] void rethrow_with_context(const std::string& context);

}  // namespace alphadisc::detail
