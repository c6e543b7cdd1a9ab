#pragma once

// Special functions used by the rate analysis: log-gamma, digamma, the
// (complete) beta function, the regularized incomplete beta function for
// integer shapes, and harmonic numbers.

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

namespace thp {

inline double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: requires x > 0");
  return std::lgamma(x);
}

inline double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: requires x > 0");
  return boost::math::digamma(x);
}

inline double beta_fn(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("beta_fn: requires a, b > 0");
  return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

/// I_x(a, b) for integer shapes a, b >= 1 via the finite binomial sum
///   sum_{m=a}^{a+b-1} C(a+b-1, m) x^m (1-x)^(a+b-1-m).
inline double regularized_incomplete_beta(double x, int a, int b) {
  if (a < 1 || b < 1)
    throw std::domain_error("regularized_incomplete_beta: integer shapes >= 1");
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("regularized_incomplete_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const int n = a + b - 1;
  // Running binomial coefficient C(n, m).
  double binom = 1.0;
  for (int m = 1; m <= a - 1; ++m) binom *= static_cast<double>(n - m + 1) / m;
  binom *= static_cast<double>(n - a + 1) / a;
  double sum = 0.0;
  for (int m = a; m <= n; ++m) {
    sum += binom * std::pow(x, m) * std::pow(1.0 - x, n - m);
    if (m < n) binom *= static_cast<double>(n - m) / (m + 1);
  }
  return sum;
}

/// H_n = sum_{l=1}^{n} 1/l
inline double harmonic(long long n) {
  if (n < 1) throw std::domain_error("harmonic: requires n >= 1");
  double h = 0.0;
  for (long long l = n; l >= 1; --l) h += 1.0 / static_cast<double>(l);
  return h;
}

}  // namespace thp
