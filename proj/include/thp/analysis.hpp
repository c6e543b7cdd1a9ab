#pragma once

// Closed-form statistics of the quantized-CSI TH precoder: the beta
// density of the interference leakage, its log expectation, the mean
// log of the quantization angle (two algebraically equivalent forms),
// the rate-loss and sum-rate upper bounds, the feedback-scaling rules,
// and the Kershaw-based decreasing envelope.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "thp/special.hpp"

namespace thp {

inline constexpr double kLog2E = 1.4426950408889634074;  // log2(e)
inline constexpr double kDbToLog2 = 0.33219280948873623;  // log2(10)/10

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct SystemParams {
  std::size_t n_t;
  std::size_t k;
  int m;          // constellation size
  int bits;       // B, n = 2^B
  double p_db;
  double p_lin;   // linear power
  double kappa;   // (M / (M-1)) K
  double c;       // (K-1) n_T / (kappa (n_T - 1))

  SystemParams(std::size_t n_t_, std::size_t k_, int m_, int bits_, double p_db_)
      : n_t(n_t_), k(k_), m(m_), bits(bits_), p_db(p_db_) {
    const int side = static_cast<int>(std::lround(std::sqrt(double(m))));
    if (k < 1 || k > n_t || m < 4 || side * side != m || bits < 0)
      throw std::invalid_argument("SystemParams: invalid parameters");
    p_lin = db_to_linear(p_db);
    kappa = static_cast<double>(m) / (m - 1) * static_cast<double>(k);
    c = static_cast<double>((k - 1) * n_t) / (kappa * (n_t - 1));
  }

  double codebook_size() const { return std::ldexp(1.0, bits); }
};

/// Density of eps_k = ||htilde_k Qhat^H||^2 ~ Beta(K-1, n_T-K), 1 < K < n_T.
inline double interference_pdf(double x, std::size_t n_t, std::size_t k) {
  if (k <= 1 || k >= n_t)
    throw std::domain_error(
        "interference_pdf: requires 1 < K < n_T (eps is constant otherwise)");
  if (!(x > 0.0 && x < 1.0))
    throw std::domain_error("interference_pdf: x in (0, 1)");
  const double a = static_cast<double>(k - 1);
  const double b = static_cast<double>(n_t - k);
  return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) / beta_fn(a, b);
}

/// E[-log2 eps_k] in bits, the exact double finite sum. Zero for K = n_T.
inline double expected_neg_log2_interference(std::size_t n_t, std::size_t k) {
  if (k < 2)
    throw std::domain_error(
        "expected_neg_log2_interference: no interference term for K = 1");
  if (k > n_t) throw std::domain_error("expected_neg_log2_interference: K <= n_T");
  if (k == n_t) return 0.0;
  const long nt = static_cast<long>(n_t);
  double sum = 0.0;
  for (long m = static_cast<long>(k) - 1; m <= nt - 2; ++m) {
    for (long l = 0; l <= nt - m - 2; ++l) {
      const double log_coef = log_gamma(nt - 1.0) - log_gamma(m + 1.0) -
                              log_gamma(l + 1.0) - log_gamma(nt - m - 1.0 - l);
      const double term = std::exp(log_coef) / static_cast<double>(m + l);
      sum += (l % 2 == 0) ? term : -term;
    }
  }
  return kLog2E * sum;
}

/// E[log2 cos^2 theta] in bits (negative), stable beta-sum form:
///   -(log2 e / (n_T-1)) sum_{i=1}^{n_T-1} beta(n, i/(n_T-1)),
/// with the beta evaluated in log-gamma space.
inline double expected_log2_cos2(std::size_t n_t, double n) {
  if (n < 1.0 || n_t < 2) throw std::domain_error("expected_log2_cos2");
  const double m1 = static_cast<double>(n_t - 1);
  double sum = 0.0;
  for (std::size_t i = 1; i <= n_t - 1; ++i) {
    const double s = static_cast<double>(i) / m1;
    sum += std::exp(log_gamma(n) + log_gamma(s) - log_gamma(n + s));
  }
  return -kLog2E / m1 * sum;
}

/// Alternating binomial form of the same expectation,
///   log2 e * sum_{i=1}^{n} C(n, i) (-1)^i H_{i (n_T-1)}.
/// The cancellation is catastrophic in double precision, so the sum runs
/// in 100-digit floats; usable as a cross-check for n up to ~1024 only.
inline double expected_log2_cos2_alternating(std::size_t n_t, long n) {
  if (n < 1 || n_t < 2) throw std::domain_error("expected_log2_cos2_alternating");
  if (n > 1024)
    throw std::domain_error("expected_log2_cos2_alternating: n too large");
  using mp = boost::multiprecision::cpp_bin_float_100;
  const long m1 = static_cast<long>(n_t) - 1;
  // Harmonic numbers H_1 .. H_{n * m1}.
  std::vector<mp> hsum(static_cast<std::size_t>(n * m1) + 1);
  hsum[0] = 0;
  for (long l = 1; l <= n * m1; ++l) hsum[l] = hsum[l - 1] + mp(1) / l;
  mp binom = 1;  // C(n, i)
  mp sum = 0;
  for (long i = 1; i <= n; ++i) {
    binom *= mp(n - i + 1) / i;
    const mp term = binom * hsum[static_cast<std::size_t>(i * m1)];
    sum += (i % 2 == 0) ? term : -term;
  }
  return static_cast<double>(mp(kLog2E) * sum);
}

/// Upper bound on the mean per-user rate loss from B-bit feedback:
///   log2(1 + c P 2^(-B/(n_T-1))) + (log2 e/(n_T-1)) sum_i beta(n, i/(n_T-1)).
inline double rate_loss_upper_bound(const SystemParams& sp) {
  const double delta = std::exp2(-static_cast<double>(sp.bits) / (sp.n_t - 1));
  const double first = std::log2(1.0 + sp.c * sp.p_lin * delta);
  return first - expected_log2_cos2(sp.n_t, sp.codebook_size());
}

/// Interference-limited ceiling on the quantized-CSI per-user rate:
///   log2 e * (double sum + H_n / (n_T - 1)).
inline double sum_rate_upper_bound(std::size_t n_t, std::size_t k, int bits) {
  const double interference_bits =
      (k == n_t) ? 0.0 : expected_neg_log2_interference(n_t, k);
  const long long n = 1ll << bits;
  return interference_bits + kLog2E * harmonic(n) / static_cast<double>(n_t - 1);
}

/// ZF feedback-bit scaling keeping the rate gap under log2(b):
///   B = (n_T-1)(log2 10 / 10) P_dB - (n_T-1) log2(b - 1).
inline double feedback_scaling_zf(std::size_t n_t, double p_db, double b) {
  if (!(b > 1.0)) throw std::domain_error("feedback_scaling_zf: requires b > 1");
  const double m1 = static_cast<double>(n_t - 1);
  return m1 * kDbToLog2 * p_db - m1 * std::log2(b - 1.0);
}

/// TH feedback-bit scaling for a gap of log2(b) with slack eps:
///   B = (n_T-1)(log2 10 / 10) P_dB - log2(b - 2^eps - 1) + log2(c).
inline double feedback_scaling_th(const SystemParams& sp, double p_db, double b,
                                  double eps) {
  const double margin = b - std::exp2(eps) - 1.0;
  if (!(margin > 0.0))
    throw std::domain_error("feedback_scaling_th: requires b - 2^eps - 1 > 0");
  if (!(sp.c > 0.0))
    throw std::domain_error("feedback_scaling_th: K = 1 has no interference");
  return static_cast<double>(sp.n_t - 1) * kDbToLog2 * p_db -
         std::log2(margin) + std::log2(sp.c);
}

/// Decreasing envelope of sum_i beta(n, i/(n_T-1)) from Kershaw's
/// gamma-ratio inequality: sum_i Gamma(i/(n_T-1)) (n - 1/2)^(-i/(n_T-1)).
inline double kershaw_j_bound(std::size_t n_t, double n) {
  if (n < 1.0 || n_t < 2) throw std::domain_error("kershaw_j_bound");
  const double m1 = static_cast<double>(n_t - 1);
  double sum = 0.0;
  for (std::size_t i = 1; i <= n_t - 1; ++i) {
    const double s = static_cast<double>(i) / m1;
    sum += std::tgamma(s) * std::pow(n - 0.5, -s);
  }
  return sum;
}

inline double instantaneous_rate(double sinr) { return std::log2(1.0 + sinr); }

}  // namespace thp
