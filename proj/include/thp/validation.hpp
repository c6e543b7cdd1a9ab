#pragma once

// Statistical validation suite: distribution checks, moment matches,
// bound dominance, and exact chain identities. Each check emits one
// line of the machine-readable report
//   check_name,statistic,threshold,verdict

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "thp/analysis.hpp"
#include "thp/harness.hpp"
#include "thp/stats.hpp"

namespace thp {

struct CheckResult {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline CheckResult check_leq(const std::string& name, double stat, double thr) {
  return {name, stat, thr, stat <= thr};
}

struct ValidationConfig {
  std::uint64_t seed = 42;
  int workers = 1;
  bool quick = false;  // reduced sample sizes for unit-test use

  std::size_t scaled(std::size_t n) const { return quick ? n / 20 : n; }
};

// ---------------------------------------------------------------------
// Chain identities (exact, tolerance-level checks).

/// Max pre-quantizer residual and symbol-error count of the noise-free
/// perfect-CSI loopback over random (H, s) draws.
struct LoopbackResult {
  double max_residual = 0.0;
  std::size_t symbol_errors = 0;
};

inline LoopbackResult run_loopback(std::size_t n_t, std::size_t k, int m,
                                   std::size_t trials, std::uint64_t seed,
                                   int workers = 1) {
  const Constellation cons = make_constellation(m);
  const double p_lin = 10.0;
  struct St {
    double max_res = 0.0;
    std::size_t errors = 0;
  };
  auto states = run_chunked<St>(
      trials, workers, seed, 11, [&](std::size_t, Rng& rng, St& st) {
        ChannelSet ch;
        PrecoderSet pre;
        for (;;) {
          try {
            ch = draw_channels(rng, n_t, k);
            pre = build_perfect(ch, cons, p_lin);
            break;
          } catch (const DegenerateChannelError&) {
          }
        }
        CVector s(k);
        for (auto& sym : s)
          sym = cons.symbols[static_cast<std::size_t>(rng.bits() % cons.symbols.size())];
        const TxFrame fr = th_encode(s, pre, cons);
        const CVector zero(k, 0.0);
        const CVector y = transmit_receive(ch, pre, fr.x, p_lin, zero);
        for (std::size_t i = 0; i < k; ++i) {
          const cplx folded = mod_tau(y[i], cons.tau);
          st.max_res = std::max(st.max_res, std::abs(folded - s[i]));
        }
        const CVector shat = detect(y, cons);
        for (std::size_t i = 0; i < k; ++i)
          if (shat[i] != s[i]) ++st.errors;
      });
  LoopbackResult out;
  for (const auto& st : states) {
    out.max_residual = std::max(out.max_residual, st.max_res);
    out.symbol_errors += st.errors;
  }
  return out;
}

/// Max |y - v - G n| over random perfect-CSI trials with noise.
inline double run_rx_identity(std::size_t n_t, std::size_t k, std::size_t trials,
                              std::uint64_t seed) {
  const Constellation cons = make_constellation(4);
  const double p_lin = db_to_linear(20.0);
  Rng rng(seed ^ 0x5ca1ab1e);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const ChannelSet ch = draw_channels(rng, n_t, k);
    const PrecoderSet pre = build_perfect(ch, cons, p_lin);
    CVector s(k);
    for (auto& sym : s)
      sym = cons.symbols[static_cast<std::size_t>(rng.bits() % cons.symbols.size())];
    const TxFrame fr = th_encode(s, pre, cons);
    CVector noise(k);
    for (auto& z : noise) z = rng.cgauss();
    const CVector y = transmit_receive(ch, pre, fr.x, p_lin, noise);
    for (std::size_t i = 0; i < k; ++i)
      worst = std::max(worst, std::abs(y[i] - fr.v[i] - pre.gdiag[i] * noise[i]));
  }
  return worst;
}

/// Max residual of the quantized-CSI received-signal decomposition
/// y = v + interference + scaled noise, each term in closed form.
inline double run_quantized_decomposition(std::size_t n_t, std::size_t k,
                                          int bits, std::size_t trials,
                                          std::uint64_t seed) {
  const Constellation cons = make_constellation(4);
  const double p_lin = db_to_linear(15.0);
  Rng rng(seed ^ 0xdec0de);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    ChannelSet ch;
    QuantizedCsi csi;
    PrecoderSet pre;
    for (;;) {
      try {
        ch = draw_channels(rng, n_t, k);
        const Codebook cb = generate_rvq(rng, bits, n_t);
        csi = quantize_all(ch, cb);
        pre = build_quantized(ch, csi, cons, p_lin);
        break;
      } catch (const DegenerateChannelError&) {
      }
    }
    CVector s(k);
    for (auto& sym : s)
      sym = cons.symbols[static_cast<std::size_t>(rng.bits() % cons.symbols.size())];
    const TxFrame fr = th_encode(s, pre, cons);
    CVector noise(k);
    for (auto& z : noise) z = rng.cgauss();
    const CVector y = transmit_receive(ch, pre, fr.x, p_lin, noise);
    for (std::size_t i = 0; i < k; ++i) {
      const UserQuant& q = csi.users[i];
      cplx intf = 0.0;
      if (!q.exact) {
        cplx leak = 0.0;
        for (std::size_t l = 0; l < k; ++l)
          leak += inner(q.htilde, pre.lq.Q.row(l)) * fr.x[l];
        intf = std::sqrt(q.sin2) / (q.c * pre.lq.R(i, i)) * leak;
      }
      const cplx scaled_noise = pre.gdiag[i] * noise[i];
      worst = std::max(worst, std::abs(y[i] - fr.v[i] - intf - scaled_noise));
    }
  }
  return worst;
}

/// Empirical transmit power E||sqrt(P/kappa) F x||^2 relative to P.
inline double run_tx_power_ratio(std::size_t n_t, std::size_t k, int m,
                                 std::size_t frames, std::uint64_t seed) {
  const Constellation cons = make_constellation(m);
  const double p_lin = db_to_linear(10.0);
  Rng rng(seed ^ 0x9a33e7);
  double acc = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    const ChannelSet ch = draw_channels(rng, n_t, k);
    PrecoderSet pre;
    try {
      pre = build_perfect(ch, cons, p_lin);
    } catch (const DegenerateChannelError&) {
      --t;
      continue;
    }
    CVector s(k);
    for (auto& sym : s)
      sym = cons.symbols[static_cast<std::size_t>(rng.bits() % cons.symbols.size())];
    const TxFrame fr = th_encode(s, pre, cons);
    const CVector tx = matvec(pre.f, fr.x);
    double e = 0.0;
    for (const cplx& z : tx) e += std::norm(z);
    acc += p_lin / pre.kappa * e;
  }
  return acc / static_cast<double>(frames) / p_lin;
}

// ---------------------------------------------------------------------
// Full validation report.

inline std::vector<CheckResult> run_validation(const ValidationConfig& vc) {
  std::vector<CheckResult> out;
  char name[128];

  // Interference leakage distribution: eps_k ~ Beta(K-1, n_T-K).
  const std::size_t ks_n = vc.scaled(20000);
  for (auto [n_t, k] : std::vector<std::pair<std::size_t, std::size_t>>{
           {4, 2}, {4, 3}, {6, 4}}) {
    const EpsSamples es =
        collect_eps_samples(n_t, k, 8, ks_n, vc.seed + n_t * 10 + k, vc.workers);
    const auto cdf = [n_t = n_t, k = k](double x) {
      return regularized_incomplete_beta(x, static_cast<int>(k) - 1,
                                         static_cast<int>(n_t - k));
    };
    std::snprintf(name, sizeof(name), "leakage_beta_ks_nt%zu_k%zu", n_t, k);
    out.push_back(check_leq(name, ks_statistic(es.first, cdf),
                            ks_one_sample_critical(es.first.size())));
    std::snprintf(name, sizeof(name), "leakage_same_dist_nt%zu_k%zu", n_t, k);
    out.push_back(check_leq(name, ks_two_sample(es.first, es.last),
                            ks_two_sample_critical(es.first.size(), es.last.size())));
  }

  // K = n_T: leakage is identically 1.
  {
    const EpsSamples es = collect_eps_samples(4, 4, 8, vc.scaled(2000), vc.seed, vc.workers);
    double worst = 0.0;
    for (double e : es.first) worst = std::max(worst, std::abs(e - 1.0));
    for (double e : es.last) worst = std::max(worst, std::abs(e - 1.0));
    out.push_back(check_leq("leakage_constant_k_eq_nt", worst, 1e-9));
  }

  // E[-log2 eps]: Monte Carlo vs the closed double sum, and the double
  // sum vs the digamma identity.
  for (auto [n_t, k] : std::vector<std::pair<std::size_t, std::size_t>>{
           {4, 2}, {4, 3}}) {
    const std::size_t n_mc = vc.scaled(100000) / k;
    const EpsSamples es =
        collect_eps_samples(n_t, k, 8, n_mc, vc.seed + 3 + n_t + k, vc.workers);
    MeanVar mv;
    for (double v : es.neg_log2) mv.add(v);
    const double closed = expected_neg_log2_interference(n_t, k);
    std::snprintf(name, sizeof(name), "log_leakage_mc_nt%zu_k%zu", n_t, k);
    out.push_back(check_leq(name, std::abs(mv.mean() / closed - 1.0),
                            vc.quick ? 0.05 : 0.01));
    const double psi_ref = kLog2E * (digamma(static_cast<double>(n_t) - 1.0) -
                                     digamma(static_cast<double>(k) - 1.0));
    std::snprintf(name, sizeof(name), "log_leakage_digamma_nt%zu_k%zu", n_t, k);
    out.push_back(check_leq(name, std::abs(closed - psi_ref), 1e-10));
  }

  // The two closed forms of E[log2 cos^2 theta] agree.
  {
    double worst = 0.0;
    for (std::size_t n_t : {2, 3, 4, 6})
      for (long n = 1; n <= 64; n *= 2)
        worst = std::max(worst,
                         std::abs(expected_log2_cos2(n_t, static_cast<double>(n)) -
                                  expected_log2_cos2_alternating(n_t, n)));
    out.push_back(check_leq("log_cos2_dual_form", worst, 1e-8));
  }

  // Monte Carlo RVQ E[log2 cos^2 theta] vs the closed form.
  {
    const std::size_t n_mc = vc.scaled(100000);
    Rng rng(vc.seed ^ 0xc052);
    MeanVar mv;
    for (std::size_t t = 0; t < n_mc; ++t) {
      const Codebook cb = generate_rvq(rng, 4, 4);
      const CVector hbar = sample_unit_sphere(rng, 4);
      mv.add(std::log2(decompose(hbar, cb.w[quantize(hbar, cb)]).cos2));
    }
    const double closed = expected_log2_cos2(4, 16.0);
    out.push_back(check_leq("log_cos2_mc_nt4_b4",
                            std::abs(mv.mean() / closed - 1.0),
                            vc.quick ? 0.08 : 0.02));
  }

  // Codebook-free sampler matches explicit RVQ (sin^2 distribution).
  {
    const std::size_t n_mc = vc.scaled(20000);
    Rng rng(vc.seed ^ 0xd12ec7);
    std::vector<double> explicit_sin2, direct_sin2;
    for (std::size_t t = 0; t < n_mc; ++t) {
      const Codebook cb = generate_rvq(rng, 8, 4);
      const CVector hbar = sample_unit_sphere(rng, 4);
      explicit_sin2.push_back(decompose(hbar, cb.w[quantize(hbar, cb)]).sin2);
      const CVector hbar2 = sample_unit_sphere(rng, 4);
      direct_sin2.push_back(sample_rvq_equivalent(rng, hbar2, 8).sin2);
    }
    out.push_back(check_leq("direct_sampler_ks_b8",
                            ks_two_sample(explicit_sin2, direct_sin2),
                            ks_two_sample_critical(n_mc, n_mc)));
  }

  // Exact chain identities.
  {
    double worst = 0.0;
    std::size_t errors = 0;
    for (auto [n_t, k] : std::vector<std::pair<std::size_t, std::size_t>>{
             {2, 1}, {2, 2}, {4, 2}, {4, 3}, {4, 4}}) {
      const LoopbackResult lr =
          run_loopback(n_t, k, 4, vc.scaled(10000), vc.seed, vc.workers);
      worst = std::max(worst, lr.max_residual);
      errors += lr.symbol_errors;
    }
    out.push_back(check_leq("loopback_residual", worst, 1e-9));
    out.push_back(check_leq("loopback_symbol_errors", static_cast<double>(errors), 0.0));
    out.push_back(check_leq("rx_identity_residual",
                            run_rx_identity(4, 4, vc.scaled(2000), vc.seed), 1e-9));
    out.push_back(check_leq(
        "quantized_decomposition_residual",
        run_quantized_decomposition(4, 3, 6, vc.scaled(2000), vc.seed), 1e-9));
    // The (M/(M-1))I covariance model overstates power because the first
    // user's symbol is never modulo-expanded. The model is validated at
    // M = 16 where folding is fine-grained; the residual downward bias at
    // M = 4 (about 8%) is tracked as its own check so regressions in the
    // encoder would surface.
    const double r16 = run_tx_power_ratio(4, 4, 16, vc.scaled(10000), vc.seed);
    out.push_back(check_leq("tx_power_ratio_error", std::abs(r16 - 1.0), 0.02));
    const double r4 = run_tx_power_ratio(4, 4, 4, vc.scaled(10000), vc.seed);
    out.push_back(check_leq("tx_power_first_user_bias_m4", std::abs(1.0 - r4), 0.10));
  }

  // Rate-loss upper bound (paired loss, 3 sigma margin).
  {
    ExperimentConfig cfg;
    cfg.trials = vc.scaled(10000);
    cfg.seed = vc.seed;
    cfg.workers = vc.workers;
    for (double p_db : {15.0, 25.0}) {
      for (int bits : {4, 8, 12}) {
        const LossMeasurement lm =
            measure_loss(cfg, bits, p_db, 300 + bits + static_cast<int>(p_db));
        const SystemParams sp(4, 4, 4, bits, p_db);
        const double bound = rate_loss_upper_bound(sp);
        std::snprintf(name, sizeof(name), "rate_loss_bound_p%g_b%d", p_db, bits);
        out.push_back(check_leq(name, lm.th_loss.mean(),
                                bound + 3.0 * lm.th_loss.stderr_mean()));
      }
    }
  }

  // Interference-limited ceiling and saturation.
  {
    ExperimentConfig cfg;
    cfg.trials = vc.scaled(10000);
    cfg.seed = vc.seed;
    cfg.workers = vc.workers;
    const LossMeasurement at30 = measure_loss(cfg, 4, 30.0, 400);
    const LossMeasurement at40 = measure_loss(cfg, 4, 40.0, 401);
    const double ceiling = sum_rate_upper_bound(4, 4, 4);
    out.push_back(check_leq("sum_rate_ceiling_p40_b4", at40.th_quant_rate.mean(),
                            ceiling + 3.0 * at40.th_quant_rate.stderr_mean()));
    out.push_back(check_leq(
        "saturation_p30_to_p40",
        at40.th_quant_rate.mean() - at30.th_quant_rate.mean(), 0.15));
  }

  // Kershaw envelope dominates the beta sum and decreases in n.
  {
    double worst_violation = -1e300;
    double worst_monotone = -1e300;
    double prev = 1e300;
    for (int n = 1; n <= 1024; ++n) {
      double beta_sum = 0.0;
      for (int i = 1; i <= 3; ++i)
        beta_sum += std::exp(log_gamma(double(n)) + log_gamma(i / 3.0) -
                             log_gamma(n + i / 3.0));
      const double kj = kershaw_j_bound(4, static_cast<double>(n));
      worst_violation = std::max(worst_violation, beta_sum - kj);
      worst_monotone = std::max(worst_monotone, kj - prev);
      prev = kj;
    }
    out.push_back(check_leq("kershaw_dominates_beta_sum", worst_violation, 0.0));
    out.push_back(check_leq("kershaw_strictly_decreasing", worst_monotone, 0.0));
  }

  return out;
}

inline std::string format_validation_report(const std::vector<CheckResult>& checks) {
  std::string s;
  char buf[256];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%s\n", c.name.c_str(),
                  c.statistic, c.threshold, c.pass ? "pass" : "fail");
    s += buf;
  }
  return s;
}

}  // namespace thp
