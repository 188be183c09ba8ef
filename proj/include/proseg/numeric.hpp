#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace proseg {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b))
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = a > b ? a : b;
  return m + std::log1p(std::exp(-(std::abs(a - b))));
}

inline double logsumexp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v)
    if (x > m) m = x;
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// log(1 - exp(-x)) for x > 0, stable near both ends
inline double log1mexp(double x) {
  if (x <= 0.0) return kNegInf;
  if (x > 0.6931471805599453) return std::log1p(-std::exp(-x));
  return std::log(-std::expm1(-x));
}

}  // namespace proseg
