#pragma once

// The TH precoding chain: square-QAM constellation, modulo reduction,
// precoder construction from perfect or quantized CSI, the recursive
// encoder, the downlink channel, receiver scaling and detection, the
// per-user SNR/SINR expressions, and the linear ZF baseline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "thp/channel.hpp"
#include "thp/linalg.hpp"
#include "thp/quantization.hpp"

namespace thp {

struct Constellation {
  int m = 0;           // M (square integer)
  double tau = 0.0;    // modulo boundary sqrt(M) * sqrt(3 / (2(M-1)))
  std::vector<cplx> symbols;  // unit average energy
};

inline Constellation make_constellation(int m) {
  const int side = static_cast<int>(std::lround(std::sqrt(double(m))));
  if (m < 4 || side * side != m)
    throw std::invalid_argument("make_constellation: M must be a square >= 4");
  const double a = std::sqrt(3.0 / (2.0 * (m - 1)));
  Constellation c;
  c.m = m;
  c.tau = side * a;
  c.symbols.reserve(m);
  for (int qi = 0; qi < side; ++qi)
    for (int qq = 0; qq < side; ++qq)
      c.symbols.emplace_back((2 * qi - side + 1) * a, (2 * qq - side + 1) * a);
  return c;
}

/// Componentwise reduction into [-tau, tau); output - input lies on the
/// offset lattice {2 tau (p_I + j p_Q)}.
inline double mod_tau_real(double x, double tau) {
  return x - 2.0 * tau * std::floor((x + tau) / (2.0 * tau));
}

inline cplx mod_tau(cplx z, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("mod_tau: tau > 0");
  return {mod_tau_real(z.real(), tau), mod_tau_real(z.imag(), tau)};
}

enum class CsiMode { kPerfect, kQuantized };

struct PrecoderSet {
  CsiMode mode = CsiMode::kPerfect;
  CMatrix f;                  // n_T x K feedforward
  CMatrix bfb;                // K x K strictly lower triangular feedback
  std::vector<cplx> gdiag;    // per-receiver scaling
  double kappa = 0.0;         // (M / (M-1)) K
  LQFactors lq;               // factors of H (perfect) or Hhat (quantized)
};

namespace detail {
inline void fill_feedback(const LQFactors& lq, PrecoderSet& p) {
  const std::size_t k = lq.R.rows();
  p.f = conj_transpose(lq.Q);
  p.bfb = CMatrix(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < i; ++j) p.bfb(i, j) = lq.R(i, j) / lq.R(i, i);
}
}  // namespace detail

inline PrecoderSet build_perfect(const ChannelSet& ch, const Constellation& cons,
                                 double p_lin) {
  PrecoderSet p;
  p.mode = CsiMode::kPerfect;
  p.lq = lq_decompose(ch.h);
  p.kappa = static_cast<double>(cons.m) / (cons.m - 1) * ch.k;
  detail::fill_feedback(p.lq, p);
  const double g0 = std::sqrt(p.kappa / p_lin);
  p.gdiag.resize(ch.k);
  for (std::size_t i = 0; i < ch.k; ++i) p.gdiag[i] = g0 / p.lq.R(i, i);
  return p;
}

inline PrecoderSet build_quantized(const ChannelSet& ch, const QuantizedCsi& csi,
                                   const Constellation& cons, double p_lin) {
  CMatrix hhat(ch.k, ch.n_t);
  for (std::size_t i = 0; i < ch.k; ++i) hhat.set_row(i, csi.users[i].hhat);
  PrecoderSet p;
  p.mode = CsiMode::kQuantized;
  p.lq = lq_decompose(hhat);  // throws on codeword collisions
  p.kappa = static_cast<double>(cons.m) / (cons.m - 1) * ch.k;
  detail::fill_feedback(p.lq, p);
  const double g0 = std::sqrt(p.kappa / p_lin);
  p.gdiag.resize(ch.k);
  for (std::size_t i = 0; i < ch.k; ++i)
    p.gdiag[i] = g0 / (ch.rho[i] * csi.users[i].c * p.lq.R(i, i));
  return p;
}

struct TxFrame {
  CVector x;  // channel symbols, components in [-tau, tau)
  CVector v;  // effective symbols, v = (B + I) x
};

inline TxFrame th_encode(std::span<const cplx> s, const PrecoderSet& p,
                         const Constellation& cons) {
  const std::size_t k = s.size();
  TxFrame fr{CVector(k), CVector(k)};
  for (std::size_t i = 0; i < k; ++i) {
    cplx acc = s[i];
    for (std::size_t l = 0; l < i; ++l) acc -= p.bfb(i, l) * fr.x[l];
    fr.x[i] = mod_tau(acc, cons.tau);
  }
  for (std::size_t i = 0; i < k; ++i) {
    cplx v = fr.x[i];
    for (std::size_t l = 0; l < i; ++l) v += p.bfb(i, l) * fr.x[l];
    fr.v[i] = v;
  }
  return fr;
}

/// y = G (sqrt(P / kappa) H F x + n)
inline CVector transmit_receive(const ChannelSet& ch, const PrecoderSet& p,
                                std::span<const cplx> x, double p_lin,
                                std::span<const cplx> noise) {
  const CVector tx = matvec(p.f, x);
  CVector y = matvec(ch.h, tx);
  const double amp = std::sqrt(p_lin / p.kappa);
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = p.gdiag[i] * (amp * y[i] + noise[i]);
  return y;
}

/// Modulo reduction followed by nearest-symbol quantization; boundary
/// ties resolve to the smaller symbol index.
inline CVector detect(std::span<const cplx> y, const Constellation& cons) {
  CVector shat(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const cplx folded = mod_tau(y[i], cons.tau);
    std::size_t best = 0;
    double best_d = std::norm(folded - cons.symbols[0]);
    for (std::size_t j = 1; j < cons.symbols.size(); ++j) {
      const double d = std::norm(folded - cons.symbols[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    shat[i] = cons.symbols[best];
  }
  return shat;
}

/// Per-user SNR under perfect CSI: xi_k = (P / kappa) |r_kk|^2.
inline std::vector<double> sinr_perfect(const PrecoderSet& p, double p_lin) {
  std::vector<double> xi(p.lq.R.rows());
  for (std::size_t i = 0; i < xi.size(); ++i)
    xi[i] = p_lin / p.kappa * std::norm(p.lq.R(i, i));
  return xi;
}

struct QuantizedSinr {
  std::vector<double> gamma;  // per-user SINR
  std::vector<double> eps;    // ||htilde_k Qhat^H||^2
};

inline QuantizedSinr sinr_quantized(const ChannelSet& ch, const QuantizedCsi& csi,
                                    const PrecoderSet& p, double p_lin) {
  QuantizedSinr out{std::vector<double>(ch.k), std::vector<double>(ch.k)};
  const double pk = p_lin / p.kappa;
  for (std::size_t i = 0; i < ch.k; ++i) {
    const UserQuant& q = csi.users[i];
    double eps = 0.0;
    if (!q.exact) {
      for (std::size_t l = 0; l < ch.k; ++l)
        eps += std::norm(inner(q.htilde, p.lq.Q.row(l)));
    }
    out.eps[i] = eps;
    const double rho2 = ch.rho[i] * ch.rho[i];
    const double sig = pk * rho2 * std::norm(p.lq.R(i, i)) * q.cos2;
    out.gamma[i] = sig / (pk * rho2 * eps * q.sin2 + 1.0);
  }
  return out;
}

/// ZF beamformers: unit-norm columns of the pseudo-inverse of the row
/// matrix (true channels or quantized directions).
inline CMatrix zf_beamformers(const CMatrix& rows) {
  const CMatrix gram = matmul(rows, conj_transpose(rows));  // K x K
  CMatrix w = matmul(conj_transpose(rows), inverse(gram));  // n_T x K
  for (std::size_t j = 0; j < w.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) s += std::norm(w(i, j));
    s = std::sqrt(s);
    for (std::size_t i = 0; i < w.rows(); ++i) w(i, j) /= s;
  }
  return w;
}

inline CMatrix build_zf_perfect(const ChannelSet& ch) { return zf_beamformers(ch.h); }

inline CMatrix build_zf_quantized(const ChannelSet& ch, const QuantizedCsi& csi) {
  CMatrix hhat(ch.k, ch.n_t);
  for (std::size_t i = 0; i < ch.k; ++i) hhat.set_row(i, csi.users[i].hhat);
  return zf_beamformers(hhat);
}

/// Per-user rate log2(1 + SINR) with equal power P/K per beam and
/// residual interference evaluated against the true channel.
inline std::vector<double> zf_rates(const ChannelSet& ch, const CMatrix& w,
                                    double p_lin) {
  const double pk = p_lin / static_cast<double>(ch.k);
  std::vector<double> rates(ch.k);
  for (std::size_t i = 0; i < ch.k; ++i) {
    double sig = 0.0;
    double intf = 0.0;
    for (std::size_t j = 0; j < ch.k; ++j) {
      cplx g = 0.0;
      for (std::size_t a = 0; a < ch.n_t; ++a) g += ch.h(i, a) * w(a, j);
      if (j == i)
        sig = pk * std::norm(g);
      else
        intf += pk * std::norm(g);
    }
    rates[i] = std::log2(1.0 + sig / (intf + 1.0));
  }
  return rates;
}

}  // namespace thp
