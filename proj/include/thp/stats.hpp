#pragma once

// Kolmogorov-Smirnov goodness-of-fit machinery for the distribution
// checks, plus mean/stderr accumulation helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace thp {

inline constexpr double kKsCritical01 = 1.628;  // c(alpha) at alpha = 0.01

/// One-sample KS statistic: sup_x |F_emp(x) - F(x)|.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  if (samples.size() < 50)
    throw std::invalid_argument("ks_statistic: need at least 50 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max((i + 1) / n - f, f - i / n));
  }
  return d;
}

inline double ks_one_sample_critical(std::size_t n, double c_alpha = kKsCritical01) {
  return c_alpha / std::sqrt(static_cast<double>(n));
}

/// Two-sample KS statistic: sup |F_a - F_b|.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 50 || b.size() < 50)
    throw std::invalid_argument("ks_two_sample: need at least 50 samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

inline double ks_two_sample_critical(std::size_t n, std::size_t m,
                                     double c_alpha = kKsCritical01) {
  return c_alpha * std::sqrt(static_cast<double>(n + m) /
                             (static_cast<double>(n) * m));
}

struct MeanVar {
  std::size_t n = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sumsq += x * x;
  }
  void merge(const MeanVar& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double stderr_mean() const {
    if (n < 2) return 0.0;
    const double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1));
    return std::sqrt(var / n);
  }
};

}  // namespace thp
