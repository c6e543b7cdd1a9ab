#pragma once

// Random vector quantization of channel directions. A codebook of n = 2^B
// isotropic unit vectors is shared by all users; each user feeds back the
// index maximizing |hbar w_i^H|^2. The selected direction splits the true
// direction as hbar = c * hhat + sin(theta) * htilde with htilde a unit
// vector orthogonal to hhat. The projection coefficient c is kept complex
// so the receiver scaling makes the useful-signal coefficient exactly 1;
// |c|^2 is the usual cos^2(theta).

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "thp/channel.hpp"
#include "thp/linalg.hpp"
#include "thp/random.hpp"

namespace thp {

struct Codebook {
  int bits = 0;                // B
  std::size_t n_t = 0;
  std::vector<CVector> w;      // 2^B unit-norm rows
};

inline Codebook generate_rvq(Rng& rng, int bits, std::size_t n_t,
                             int max_bits = 24) {
  if (bits < 0) throw std::invalid_argument("generate_rvq: B >= 0");
  if (n_t < 2) throw std::invalid_argument("generate_rvq: n_T >= 2");
  if (bits > max_bits)
    throw std::length_error("generate_rvq: codebook size exceeds memory guard");
  Codebook cb;
  cb.bits = bits;
  cb.n_t = n_t;
  const std::size_t n = std::size_t{1} << bits;
  cb.w.reserve(n);
  for (std::size_t i = 0; i < n; ++i) cb.w.push_back(sample_unit_sphere(rng, n_t));
  return cb;
}

/// argmax_i |hbar w_i^H|^2, ties to the lowest index.
inline std::size_t quantize(std::span<const cplx> hbar, const Codebook& cb) {
  if (cb.w.empty()) throw std::invalid_argument("quantize: empty codebook");
  std::size_t best = 0;
  double best_metric = -1.0;
  for (std::size_t i = 0; i < cb.w.size(); ++i) {
    const double m = std::norm(inner(hbar, cb.w[i]));
    if (m > best_metric) {
      best_metric = m;
      best = i;
    }
  }
  return best;
}

struct UserQuant {
  std::size_t index = 0;   // codebook index (0 when sampled directly)
  CVector hhat;            // selected unit direction
  cplx c = 0.0;            // hbar hhat^H
  double cos2 = 0.0;       // |c|^2
  double sin2 = 0.0;       // 1 - cos2
  CVector htilde;          // unit residual direction (unused when exact)
  bool exact = false;      // quantization error below tolerance
};

inline UserQuant decompose(std::span<const cplx> hbar,
                           std::span<const cplx> hhat) {
  UserQuant q;
  q.hhat.assign(hhat.begin(), hhat.end());
  q.c = inner(hbar, hhat);
  q.cos2 = std::norm(q.c);
  q.sin2 = 1.0 - q.cos2;
  CVector r(hbar.size());
  for (std::size_t j = 0; j < hbar.size(); ++j) r[j] = hbar[j] - q.c * hhat[j];
  const double rn = norm(r);
  if (rn > 1e-10) {
    q.htilde.resize(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) q.htilde[j] = r[j] / rn;
  } else {
    q.exact = true;
    q.cos2 = 1.0;
    q.sin2 = 0.0;
  }
  return q;
}

struct QuantizedCsi {
  std::vector<UserQuant> users;
};

inline QuantizedCsi quantize_all(const ChannelSet& cs, const Codebook& cb) {
  QuantizedCsi csi;
  csi.users.reserve(cs.k);
  for (std::size_t k = 0; k < cs.k; ++k) {
    const std::size_t idx = quantize(cs.hbar[k], cb);
    UserQuant q = decompose(cs.hbar[k], cb.w[idx]);
    q.index = idx;
    csi.users.push_back(std::move(q));
  }
  return csi;
}

/// Draws the selected codeword of a fresh 2^B-entry RVQ codebook without
/// materializing the codebook. sin^2(theta) is the minimum of n i.i.d.
/// variables with CDF x^(n_T - 1), sampled by inverse transform; the
/// codeword direction around hbar is isotropic at that angle with a
/// uniform global phase. Distribution-identical to explicit RVQ; used
/// when 2^B codewords cannot be enumerated.
inline UserQuant sample_rvq_equivalent(Rng& rng, std::span<const cplx> hbar,
                                       int bits) {
  if (bits < 0) throw std::invalid_argument("sample_rvq_equivalent: B >= 0");
  const std::size_t n_t = hbar.size();
  if (n_t < 2) throw std::invalid_argument("sample_rvq_equivalent: n_T >= 2");
  const double n = std::ldexp(1.0, bits);
  // P(sin^2 <= x) = 1 - (1 - x^(n_T-1))^n; invert at u ~ U(0,1).
  const double u = rng.uniform();
  const double inner_cdf = -std::expm1(std::log1p(-u) / n);
  const double sin2 = std::pow(inner_cdf, 1.0 / static_cast<double>(n_t - 1));
  const double sin_t = std::sqrt(std::min(1.0, std::max(0.0, sin2)));
  const double cos_t = std::sqrt(std::max(0.0, 1.0 - sin2));

  // Isotropic unit vector orthogonal to hbar.
  CVector perp(n_t);
  double pn;
  do {
    for (auto& z : perp) z = rng.cgauss();
    const cplx proj = inner(perp, hbar);
    for (std::size_t j = 0; j < n_t; ++j) perp[j] -= proj * hbar[j];
    pn = norm(perp);
  } while (pn < 1e-12);
  for (auto& z : perp) z /= pn;

  const double psi = 2.0 * M_PI * rng.uniform();
  const cplx phase(std::cos(psi), std::sin(psi));
  CVector hhat(n_t);
  for (std::size_t j = 0; j < n_t; ++j)
    hhat[j] = phase * (cos_t * hbar[j] + sin_t * perp[j]);
  return decompose(hbar, hhat);
}

/// Monte Carlo E[sin^2 theta] from genuine RVQ quantization.
inline double quantization_error_stats(std::size_t n_t, int bits,
                                       std::size_t trials, Rng& rng) {
  if (trials < 1) throw std::invalid_argument("quantization_error_stats");
  double acc = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Codebook cb = generate_rvq(rng, bits, n_t);
    const CVector hbar = sample_unit_sphere(rng, n_t);
    const std::size_t idx = quantize(hbar, cb);
    acc += decompose(hbar, cb.w[idx]).sin2;
  }
  return acc / static_cast<double>(trials);
}

}  // namespace thp
