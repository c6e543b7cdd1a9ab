#pragma once

// Seeded RNG with derived per-trial streams. Every sampler takes an Rng
// by reference so results are a pure function of (seed, stream, trial).

#include <cstdint>
#include <random>

#include "thp/linalg.hpp"

namespace thp {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Independent stream for (seed, stream, trial); trials drawn from
  /// distinct streams are statistically independent and reproducible
  /// regardless of execution order.
  static Rng for_trial(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t trial) {
    std::uint64_t s = seed;
    std::uint64_t a = detail::splitmix64(s);
    s ^= stream * 0xda942042e4dd58b5ull;
    std::uint64_t b = detail::splitmix64(s);
    s ^= trial * 0x2545f4914f6cdd1dull;
    std::uint64_t c = detail::splitmix64(s);
    return Rng(a ^ (b + 0x9e3779b97f4a7c15ull) ^ c);
  }

  double uniform() { return unif_(gen_); }
  double gauss() { return normal_(gen_); }

  /// Circularly-symmetric complex Gaussian, E|z|^2 = 1.
  cplx cgauss() {
    const double re = gauss();
    const double im = gauss();
    return cplx(re * kInvSqrt2, im * kInvSqrt2);
  }

  std::uint64_t bits() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

 private:
  static constexpr double kInvSqrt2 = 0.70710678118654752440;
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

/// K x n_T matrix of i.i.d. unit-variance circularly-symmetric entries.
inline CMatrix sample_complex_gaussian(Rng& rng, std::size_t rows,
                                       std::size_t cols) {
  CMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.cgauss();
  return m;
}

/// Isotropic unit-norm complex row vector (normalized Gaussian draw).
inline CVector sample_unit_sphere(Rng& rng, std::size_t n) {
  CVector v(n);
  double s;
  do {
    for (auto& z : v) z = rng.cgauss();
    s = norm(v);
  } while (s < 1e-12);
  for (auto& z : v) z /= s;
  return v;
}

}  // namespace thp
