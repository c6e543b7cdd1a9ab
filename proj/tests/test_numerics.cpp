#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "thp/linalg.hpp"
#include "thp/random.hpp"
#include "thp/special.hpp"

using namespace thp;

namespace {

// Independent classical Gram-Schmidt oracle for the LQ uniqueness check.
LQFactors classical_gs(const CMatrix& h) {
  const std::size_t k = h.rows(), nt = h.cols();
  LQFactors f{CMatrix(k, k), CMatrix(k, nt)};
  for (std::size_t i = 0; i < k; ++i) {
    CVector u(nt);
    for (std::size_t j = 0; j < nt; ++j) u[j] = h(i, j);
    for (std::size_t l = 0; l < i; ++l) {
      const cplx c = inner(h.row(i), f.Q.row(l));
      f.R(i, l) = c;
      for (std::size_t j = 0; j < nt; ++j) u[j] -= c * f.Q(l, j);
    }
    const double d = norm(u);
    f.R(i, i) = d;
    for (std::size_t j = 0; j < nt; ++j) f.Q(i, j) = u[j] / d;
  }
  return f;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace

TEST_CASE("inner product and norms") {
  const CVector a = {cplx(1, 0), cplx(0, 1)};
  CHECK(inner(a, a).real() == doctest::Approx(2.0));
  CHECK(inner(a, a).imag() == doctest::Approx(0.0));
  const CVector b = {cplx(0, 1), cplx(1, 0)};
  // <a,b> = 1*conj(i) + i*conj(1) = -i + i = 0
  CHECK(std::abs(inner(a, b)) == doctest::Approx(0.0));
  CHECK(norm(a) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("matrix inverse on a known Hermitian matrix") {
  CMatrix a(2, 2);
  a(0, 0) = 2.0;
  a(0, 1) = cplx(0, 1);
  a(1, 0) = cplx(0, -1);
  a(1, 1) = 1.0;
  const CMatrix inv = inverse(a);  // det = 1, inverse = [[1,-i],[i,2]]
  CHECK(std::abs(inv(0, 0) - cplx(1, 0)) < 1e-12);
  CHECK(std::abs(inv(0, 1) - cplx(0, -1)) < 1e-12);
  CHECK(std::abs(inv(1, 0) - cplx(0, 1)) < 1e-12);
  CHECK(std::abs(inv(1, 1) - cplx(2, 0)) < 1e-12);
  CHECK(max_abs_diff(matmul(a, inv), CMatrix::identity(2)) < 1e-12);

  CMatrix sing(2, 2);
  sing(0, 0) = sing(0, 1) = sing(1, 0) = sing(1, 1) = 1.0;
  CHECK_THROWS_AS(inverse(sing), DegenerateChannelError);
}

TEST_CASE("LQ of the identity is trivial") {
  const auto f = lq_decompose(CMatrix::identity(4));
  CHECK(max_abs_diff(f.R, CMatrix::identity(4)) < 1e-14);
  CHECK(max_abs_diff(f.Q, CMatrix::identity(4)) < 1e-14);
}

TEST_CASE("LQ of a single row is norm times direction") {
  CMatrix h(1, 2);
  h(0, 0) = 3.0;
  h(0, 1) = 4.0;
  const auto f = lq_decompose(h);
  CHECK(f.R(0, 0).real() == doctest::Approx(5.0));
  CHECK(f.Q(0, 0).real() == doctest::Approx(0.6));
  CHECK(f.Q(0, 1).real() == doctest::Approx(0.8));
}

TEST_CASE("LQ reconstruction, semi-unitarity, triangular structure") {
  Rng rng(1234);
  for (int t = 0; t < 100; ++t) {
    const std::size_t nt = 2 + (t % 4);       // 2..5
    const std::size_t k = 1 + (t % nt);       // 1..nt
    const CMatrix h = sample_complex_gaussian(rng, k, nt);
    const auto f = lq_decompose(h);
    CHECK(max_abs_diff(matmul(f.R, f.Q), h) < 1e-10);
    const CMatrix qq = matmul(f.Q, conj_transpose(f.Q));
    CHECK(max_abs_diff(qq, CMatrix::identity(k)) < 1e-12);
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(f.R(i, i).imag() == doctest::Approx(0.0));
      CHECK(f.R(i, i).real() > 0.0);
      for (std::size_t j = i + 1; j < k; ++j) CHECK(std::abs(f.R(i, j)) == 0.0);
    }
  }
}

TEST_CASE("LQ agrees with an independent Gram-Schmidt oracle") {
  Rng rng(77);
  for (int t = 0; t < 20; ++t) {
    const CMatrix h = sample_complex_gaussian(rng, 3, 4);
    const auto a = lq_decompose(h);
    const auto b = classical_gs(h);
    CHECK(max_abs_diff(a.R, b.R) < 1e-8);
    CHECK(max_abs_diff(a.Q, b.Q) < 1e-8);
  }
}

TEST_CASE("LQ rejects rank-deficient matrices") {
  Rng rng(5);
  CMatrix h = sample_complex_gaussian(rng, 3, 4);
  for (std::size_t j = 0; j < 4; ++j) h(2, j) = 2.0 * h(0, j);
  CHECK_THROWS_AS(lq_decompose(h), DegenerateChannelError);

  CMatrix wide(3, 2);
  CHECK_THROWS_AS(lq_decompose(wide), std::invalid_argument);
}

TEST_CASE("log-gamma, digamma, beta") {
  CHECK(log_gamma(1.0) == doctest::Approx(0.0));
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)));
  CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
  CHECK(digamma(1.0) == doctest::Approx(-0.5772156649015329));
  CHECK(digamma(3.0) - digamma(1.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(digamma(-1.0), std::domain_error);
  CHECK(beta_fn(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(beta_fn(2.5, 1.5) == doctest::Approx(M_PI / 16.0));
  CHECK_THROWS_AS(beta_fn(0.0, 1.0), std::domain_error);
}

TEST_CASE("regularized incomplete beta for integer shapes") {
  for (double x : {0.1, 0.25, 0.5, 0.9})
    CHECK(regularized_incomplete_beta(x, 1, 1) == doctest::Approx(x));
  CHECK(regularized_incomplete_beta(0.5, 1, 2) == doctest::Approx(0.75));
  CHECK(regularized_incomplete_beta(0.5, 2, 1) == doctest::Approx(0.25));
  CHECK(regularized_incomplete_beta(0.0, 3, 2) == 0.0);
  CHECK(regularized_incomplete_beta(1.0, 3, 2) == 1.0);

  // Reflection identity I_x(a,b) = 1 - I_{1-x}(b,a).
  for (double x : {0.2, 0.4, 0.6})
    CHECK(regularized_incomplete_beta(x, 3, 2) ==
          doctest::Approx(1.0 - regularized_incomplete_beta(1.0 - x, 2, 3))
              .epsilon(1e-12));

  // Quadrature oracle: Simpson integration of the Beta(3,2) density.
  const auto pdf = [](double t) {
    return t * t * (1.0 - t) / beta_fn(3.0, 2.0);
  };
  const double x = 0.3;
  const int steps = 20000;
  double integral = pdf(0.0) + pdf(x);
  for (int i = 1; i < steps; ++i)
    integral += (i % 2 ? 4.0 : 2.0) * pdf(x * i / steps);
  integral *= x / steps / 3.0;
  CHECK(regularized_incomplete_beta(x, 3, 2) ==
        doctest::Approx(integral).epsilon(1e-8));
}

TEST_CASE("harmonic numbers") {
  CHECK(harmonic(1) == doctest::Approx(1.0));
  CHECK(harmonic(2) == doctest::Approx(1.5));
  CHECK(harmonic(16) == doctest::Approx(3.3807289932289901).epsilon(1e-12));
  CHECK_THROWS_AS(harmonic(0), std::domain_error);
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a = Rng::for_trial(42, 3, 17);
  Rng b = Rng::for_trial(42, 3, 17);
  Rng c = Rng::for_trial(42, 3, 18);
  bool all_equal = true, any_equal_c = false;
  for (int i = 0; i < 16; ++i) {
    const auto va = a.bits(), vb = b.bits(), vc = c.bits();
    all_equal &= (va == vb);
    any_equal_c |= (va == vc);
  }
  CHECK(all_equal);
  CHECK_FALSE(any_equal_c);
}

TEST_CASE("complex gaussian moments") {
  Rng rng(99);
  double mean_re = 0.0, power = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const cplx z = rng.cgauss();
    mean_re += z.real();
    power += std::norm(z);
  }
  CHECK(std::abs(mean_re / n) < 0.01);
  CHECK(power / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("unit-sphere samples are isotropic") {
  Rng rng(7);
  double comp = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const CVector v = sample_unit_sphere(rng, 4);
    CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
    comp += std::norm(v[0]);
  }
  // |v_0|^2 ~ Beta(1,3), mean 1/4.
  CHECK(comp / n == doctest::Approx(0.25).epsilon(0.03));
}
