#include <doctest.h>

#include <cmath>
#include <vector>

#include "thp/quantization.hpp"
#include "thp/stats.hpp"

using namespace thp;

TEST_CASE("codebook generation") {
  Rng rng(3);
  const Codebook cb = generate_rvq(rng, 5, 4);
  REQUIRE(cb.w.size() == 32);
  for (const auto& w : cb.w) CHECK(norm(w) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(generate_rvq(rng, -1, 4), std::invalid_argument);
  CHECK_THROWS_AS(generate_rvq(rng, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_rvq(rng, 6, 4, 4), std::length_error);
}

TEST_CASE("quantizer picks the maximum-alignment codeword") {
  Rng rng(8);
  const Codebook cb = generate_rvq(rng, 6, 4);
  for (int t = 0; t < 50; ++t) {
    const CVector hbar = sample_unit_sphere(rng, 4);
    const std::size_t idx = quantize(hbar, cb);
    const double chosen = std::norm(inner(hbar, cb.w[idx]));
    for (const auto& w : cb.w)
      CHECK(std::norm(inner(hbar, w)) <= chosen + 1e-15);
  }
}

TEST_CASE("direction decomposition invariants") {
  Rng rng(13);
  for (int t = 0; t < 200; ++t) {
    const CVector hbar = sample_unit_sphere(rng, 4);
    const CVector hhat = sample_unit_sphere(rng, 4);
    const UserQuant q = decompose(hbar, hhat);
    CHECK(q.cos2 + q.sin2 == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE_FALSE(q.exact);
    CHECK(norm(q.htilde) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(inner(q.htilde, q.hhat)) < 1e-10);
    const double st = std::sqrt(q.sin2);
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(std::abs(hbar[j] - (q.c * hhat[j] + st * q.htilde[j])) < 1e-10);
  }
}

TEST_CASE("decomposition flags an exact match") {
  Rng rng(14);
  const CVector hbar = sample_unit_sphere(rng, 4);
  const UserQuant q = decompose(hbar, hbar);
  CHECK(q.exact);
  CHECK(q.cos2 == 1.0);
  CHECK(q.sin2 == 0.0);
  // A global phase is still an exact direction match.
  CVector rotated = hbar;
  const cplx ph = std::polar(1.0, 1.1);
  for (auto& z : rotated) z *= ph;
  CHECK(decompose(hbar, rotated).exact);
}

TEST_CASE("mean quantization error: B = 0 on two antennas is uniform") {
  // sin^2 theta has CDF x^(n_T - 1) = x, so the mean is 1/2.
  Rng rng(31);
  const double m = quantization_error_stats(2, 0, 5000, rng);
  CHECK(m == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("mean quantization error: cap bound and monotonicity") {
  Rng rng(32);
  double prev = 1.0;
  for (int bits : {2, 4, 6, 8}) {
    const double delta = std::exp2(-bits / 3.0);
    const double m = quantization_error_stats(4, bits, 3000, rng);
    CHECK(m <= delta);
    CHECK(m >= 0.5 * delta);
    CHECK(m < prev);
    prev = m;
  }
}

TEST_CASE("codebook-free sampler: invariants and exact min-cap law") {
  Rng rng(57);
  std::vector<double> sin2;
  for (int t = 0; t < 20000; ++t) {
    const CVector hbar = sample_unit_sphere(rng, 4);
    const UserQuant q = sample_rvq_equivalent(rng, hbar, 8);
    REQUIRE_FALSE(q.exact);
    CHECK(norm(q.hhat) == doctest::Approx(1.0).epsilon(1e-10));
    const double st = std::sqrt(q.sin2);
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(std::abs(hbar[j] - (q.c * q.hhat[j] + st * q.htilde[j])) < 1e-9);
    sin2.push_back(q.sin2);
  }
  // sin^2 is the minimum of 2^B draws with CDF x^(n_T-1).
  const auto cdf = [](double x) {
    return -std::expm1(256.0 * std::log1p(-x * x * x));
  };
  CHECK(ks_statistic(sin2, cdf) < ks_one_sample_critical(sin2.size()));
}

TEST_CASE("codebook-free sampler matches explicit quantization at B = 4") {
  Rng rng(58);
  std::vector<double> explicit_cos2, direct_cos2;
  for (int t = 0; t < 5000; ++t) {
    const Codebook cb = generate_rvq(rng, 4, 4);
    const CVector h1 = sample_unit_sphere(rng, 4);
    explicit_cos2.push_back(decompose(h1, cb.w[quantize(h1, cb)]).cos2);
    const CVector h2 = sample_unit_sphere(rng, 4);
    direct_cos2.push_back(sample_rvq_equivalent(rng, h2, 4).cos2);
  }
  CHECK(ks_two_sample(explicit_cos2, direct_cos2) <
        ks_two_sample_critical(explicit_cos2.size(), direct_cos2.size()));
}
