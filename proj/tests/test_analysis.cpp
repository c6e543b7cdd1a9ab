#include <doctest.h>

#include <cmath>

#include "thp/analysis.hpp"

using namespace thp;

TEST_CASE("dB conversion and system parameters") {
  CHECK(db_to_linear(0.0) == doctest::Approx(1.0));
  CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
  CHECK(db_to_linear(20.0) == doctest::Approx(100.0));
  CHECK(kDbToLog2 == doctest::Approx(std::log2(10.0) / 10.0).epsilon(1e-15));

  const SystemParams sp(4, 4, 4, 4, 25.0);
  CHECK(sp.kappa == doctest::Approx(16.0 / 3.0));
  CHECK(sp.c == doctest::Approx(0.75));
  CHECK(sp.codebook_size() == 16.0);
  CHECK_THROWS_AS(SystemParams(2, 3, 4, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SystemParams(4, 4, 5, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SystemParams(4, 4, 4, -1, 0.0), std::invalid_argument);
}

TEST_CASE("leakage density is the expected beta law") {
  // (n_T, K) = (4, 2): Beta(1, 2), density 2(1 - x).
  for (double x : {0.1, 0.5, 0.9})
    CHECK(interference_pdf(x, 4, 2) == doctest::Approx(2.0 * (1.0 - x)));
  CHECK(interference_pdf(0.5, 4, 2) == doctest::Approx(1.0));

  // Normalization and mean by Simpson quadrature for (6, 4): Beta(3, 2).
  const int steps = 20000;
  double mass = 0.0, mean = 0.0;
  for (int i = 1; i < steps; ++i) {
    const double x = static_cast<double>(i) / steps;
    const double wgt = (i % 2 ? 4.0 : 2.0) / 3.0 / steps;
    const double f = interference_pdf(x, 6, 4);
    mass += wgt * f;
    mean += wgt * x * f;
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(mean == doctest::Approx(3.0 / 5.0).epsilon(1e-6));

  CHECK_THROWS_AS(interference_pdf(0.5, 4, 1), std::domain_error);
  CHECK_THROWS_AS(interference_pdf(0.5, 4, 4), std::domain_error);
  CHECK_THROWS_AS(interference_pdf(1.5, 4, 2), std::domain_error);
}

TEST_CASE("mean log leakage: closed sum vs digamma identity") {
  // E[-ln eps] = psi(n_T - 1) - psi(K - 1).
  CHECK(expected_neg_log2_interference(4, 2) ==
        doctest::Approx(kLog2E * 1.5).epsilon(1e-12));
  CHECK(expected_neg_log2_interference(4, 3) ==
        doctest::Approx(kLog2E * 0.5).epsilon(1e-12));
  CHECK(expected_neg_log2_interference(6, 4) ==
        doctest::Approx(kLog2E * (1.0 / 3.0 + 1.0 / 4.0)).epsilon(1e-10));
  for (auto [nt, k] : {std::pair<std::size_t, std::size_t>{5, 2}, {6, 3}, {8, 5}})
    CHECK(expected_neg_log2_interference(nt, k) ==
          doctest::Approx(kLog2E * (digamma(double(nt) - 1.0) -
                                    digamma(double(k) - 1.0)))
              .epsilon(1e-10));
  CHECK(expected_neg_log2_interference(4, 4) == 0.0);
  CHECK_THROWS_AS(expected_neg_log2_interference(4, 1), std::domain_error);
}

TEST_CASE("mean log squared quantization alignment") {
  // n = 1: the angle is against a single random direction, so
  // E[log2 cos^2] = -log2(e) * H_{n_T - 1}.
  CHECK(expected_log2_cos2(4, 1.0) ==
        doctest::Approx(-kLog2E * (1.0 + 0.5 + 1.0 / 3.0)).epsilon(1e-12));
  CHECK(expected_log2_cos2_alternating(4, 1) ==
        doctest::Approx(-kLog2E * (1.0 + 0.5 + 1.0 / 3.0)).epsilon(1e-12));

  // The two closed forms agree (full grid covered by the validation suite).
  for (std::size_t nt : {2, 3, 4, 6})
    for (long n : {1, 2, 4, 8, 16, 64})
      CHECK(expected_log2_cos2(nt, static_cast<double>(n)) ==
            doctest::Approx(expected_log2_cos2_alternating(nt, n))
                .epsilon(1e-8));

  // Cross-check against the standard-library beta function.
  for (long n : {3, 17, 1000, 1 << 20}) {
    double ref = 0.0;
    for (int i = 1; i <= 3; ++i) ref += std::beta(double(n), i / 3.0);
    CHECK(expected_log2_cos2(4, static_cast<double>(n)) ==
          doctest::Approx(-kLog2E / 3.0 * ref).epsilon(1e-10));
  }

  // Finer codebooks align better: the expectation increases toward 0.
  double prev = -1e9;
  for (int b = 0; b <= 20; b += 2) {
    const double v = expected_log2_cos2(4, std::ldexp(1.0, b));
    CHECK(v > prev);
    CHECK(v < 0.0);
    prev = v;
  }

  CHECK_THROWS_AS(expected_log2_cos2(4, 0.5), std::domain_error);
  CHECK_THROWS_AS(expected_log2_cos2_alternating(4, 2000), std::domain_error);
}

TEST_CASE("rate-loss upper bound composition") {
  const SystemParams sp(4, 4, 4, 6, 20.0);
  const double delta = std::exp2(-2.0);
  const double expected = std::log2(1.0 + 0.75 * 100.0 * delta) -
                          expected_log2_cos2(4, 64.0);
  CHECK(rate_loss_upper_bound(sp) == doctest::Approx(expected).epsilon(1e-12));
  // More feedback bits never loosen the bound.
  double prev = 1e9;
  for (int b : {2, 4, 8, 12, 16}) {
    const double v = rate_loss_upper_bound(SystemParams(4, 4, 4, b, 20.0));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("interference-limited rate ceiling") {
  // n_T = K = 4, B = 4: log2(e) * H_16 / 3.
  CHECK(sum_rate_upper_bound(4, 4, 4) ==
        doctest::Approx(kLog2E * harmonic(16) / 3.0).epsilon(1e-12));
  CHECK(sum_rate_upper_bound(4, 4, 4) == doctest::Approx(1.6258).epsilon(1e-4));
  // K < n_T adds the leakage-log term.
  CHECK(sum_rate_upper_bound(4, 2, 4) ==
        doctest::Approx(kLog2E * (1.5 + harmonic(16) / 3.0)).epsilon(1e-12));
  // The ceiling grows with B (more bits, higher saturation level).
  CHECK(sum_rate_upper_bound(4, 4, 8) > sum_rate_upper_bound(4, 4, 4));
}

TEST_CASE("feedback scaling rules") {
  CHECK(feedback_scaling_zf(4, 20.0, 3.0) ==
        doctest::Approx(3.0 * kDbToLog2 * 20.0 - 3.0).epsilon(1e-12));
  CHECK(feedback_scaling_zf(4, 20.0, 2.0) ==
        doctest::Approx(3.0 * kDbToLog2 * 20.0).epsilon(1e-12));
  CHECK_THROWS_AS(feedback_scaling_zf(4, 20.0, 1.0), std::domain_error);

  const SystemParams sp(4, 4, 4, 0, 20.0);
  CHECK(feedback_scaling_th(sp, 20.0, 3.0, 0.0) ==
        doctest::Approx(3.0 * kDbToLog2 * 20.0 + std::log2(0.75)).epsilon(1e-12));
  // b = 4, eps = 1 has margin 1 as well.
  CHECK(feedback_scaling_th(sp, 20.0, 4.0, 1.0) ==
        doctest::Approx(feedback_scaling_th(sp, 20.0, 3.0, 0.0)).epsilon(1e-12));
  CHECK_THROWS_AS(feedback_scaling_th(sp, 20.0, 3.0, 1.0), std::domain_error);
  const SystemParams single(4, 1, 4, 0, 20.0);
  CHECK_THROWS_AS(feedback_scaling_th(single, 20.0, 3.0, 0.0), std::domain_error);
}

TEST_CASE("gamma-ratio envelope") {
  // Direct evaluation at n = 16, n_T = 4.
  double ref = 0.0;
  for (int i = 1; i <= 3; ++i)
    ref += std::tgamma(i / 3.0) * std::pow(15.5, -i / 3.0);
  CHECK(kershaw_j_bound(4, 16.0) == doctest::Approx(ref).epsilon(1e-12));

  double prev = 1e300;
  for (int n = 1; n <= 200; ++n) {
    const double kj = kershaw_j_bound(4, static_cast<double>(n));
    CHECK(kj < prev);
    prev = kj;
    double beta_sum = 0.0;
    for (int i = 1; i <= 3; ++i) beta_sum += std::beta(double(n), i / 3.0);
    CHECK(beta_sum <= kj);
  }
}

TEST_CASE("instantaneous rate") {
  CHECK(instantaneous_rate(0.0) == doctest::Approx(0.0));
  CHECK(instantaneous_rate(1.0) == doctest::Approx(1.0));
  CHECK(instantaneous_rate(3.0) == doctest::Approx(2.0));
}
