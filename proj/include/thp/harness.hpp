#pragma once

// Monte Carlo experiment engine. Trials are independent units keyed by
// (seed, stream, trial index); workers pull fixed-size chunks and the
// reduction runs in chunk order, so results are byte-identical for any
// worker count.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "thp/analysis.hpp"
#include "thp/channel.hpp"
#include "thp/linalg.hpp"
#include "thp/precoding.hpp"
#include "thp/quantization.hpp"
#include "thp/random.hpp"
#include "thp/stats.hpp"

namespace thp {

enum class Scheme { kThPerfect, kThQuantized, kZfPerfect, kZfQuantized };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kThPerfect: return "th_perfect";
    case Scheme::kThQuantized: return "th_quantized";
    case Scheme::kZfPerfect: return "zf_perfect";
    case Scheme::kZfQuantized: return "zf_quantized";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "th_perfect") return Scheme::kThPerfect;
  if (s == "th_quantized") return Scheme::kThQuantized;
  if (s == "zf_perfect") return Scheme::kZfPerfect;
  if (s == "zf_quantized") return Scheme::kZfQuantized;
  throw std::invalid_argument("unknown scheme: " + s);
}

inline bool is_quantized(Scheme s) {
  return s == Scheme::kThQuantized || s == Scheme::kZfQuantized;
}

struct ExperimentConfig {
  std::size_t n_t = 4;
  std::size_t k = 4;
  int m = 4;
  std::size_t trials = 10000;
  std::uint64_t seed = 42;
  std::vector<double> snr_db = {0, 5, 10, 15, 20, 25, 30, 35, 40};
  std::vector<int> bits = {4, 8, 15};
  std::vector<Scheme> schemes = {Scheme::kThPerfect, Scheme::kThQuantized,
                                 Scheme::kZfPerfect, Scheme::kZfQuantized};
  int workers = 1;
  // B at or above this uses the codebook-free sampler with the exact RVQ
  // selected-codeword statistics; below it, an explicit codebook is drawn
  // per trial and scanned.
  int direct_sampler_min_bits = 15;
  bool perfect_codebook_hook = false;  // pretend the codebook holds the true directions
  std::string out;

  void validate() const {
    if (k < 1 || k > n_t) throw std::invalid_argument("config: requires 1 <= K <= n_T");
    if (trials < 1) throw std::invalid_argument("config: trials >= 1");
    if (snr_db.empty()) throw std::invalid_argument("config: empty SNR grid");
    if (schemes.empty()) throw std::invalid_argument("config: no schemes");
    bool quant = false;
    for (Scheme s : schemes) quant |= is_quantized(s);
    if (quant && bits.empty()) throw std::invalid_argument("config: empty bits grid");
    const int side = static_cast<int>(std::lround(std::sqrt(double(m))));
    if (m < 4 || side * side != m)
      throw std::invalid_argument("config: M must be a square >= 4");
    if (workers < 1) throw std::invalid_argument("config: workers >= 1");
  }
};

struct RateRecord {
  std::string scheme;
  double p_db = 0.0;
  int bits = -1;  // -1 for schemes that do not depend on B
  int user = -1;  // -1 for the across-user mean
  double mean_rate = 0.0;
  double stderr_mean = 0.0;
  std::size_t trials = 0;
  std::size_t resampled = 0;
};

// ---------------------------------------------------------------------
// Deterministic chunked parallel execution.

inline constexpr std::size_t kChunkSize = 256;

template <typename State, typename TrialFn>
std::vector<State> run_chunked(std::size_t trials, int workers,
                               std::uint64_t seed, std::uint64_t stream,
                               const TrialFn& fn) {
  const std::size_t n_chunks = (trials + kChunkSize - 1) / kChunkSize;
  std::vector<State> states(n_chunks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const std::size_t begin = c * kChunkSize;
      const std::size_t end = std::min(trials, begin + kChunkSize);
      for (std::size_t t = begin; t < end; ++t) {
        Rng rng = Rng::for_trial(seed, stream, t);
        fn(t, rng, states[c]);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return states;
}

// ---------------------------------------------------------------------
// One trial: channel + feedback draw + precoder state shared by every
// scheme and SNR point of a cell group.

struct TrialContext {
  ChannelSet ch;
  PrecoderSet perfect;               // built whenever needed
  std::optional<QuantizedCsi> csi;
  std::optional<PrecoderSet> quantized;
  std::optional<QuantizedSinr> qsinr_unit;  // eps cached; gamma recomputed per P
  CMatrix zf_w;                      // perfect-CSI beamformers
  CMatrix zf_w_quant;                // quantized-CSI beamformers
  std::size_t resamples = 0;
};

namespace detail {

inline QuantizedCsi draw_quantized_csi(Rng& rng, const ChannelSet& ch, int bits,
                                       const ExperimentConfig& cfg) {
  QuantizedCsi csi;
  if (cfg.perfect_codebook_hook) {
    for (std::size_t u = 0; u < ch.k; ++u)
      csi.users.push_back(decompose(ch.hbar[u], ch.hbar[u]));
    return csi;
  }
  if (bits >= cfg.direct_sampler_min_bits) {
    for (std::size_t u = 0; u < ch.k; ++u)
      csi.users.push_back(sample_rvq_equivalent(rng, ch.hbar[u], bits));
    return csi;
  }
  const Codebook cb = generate_rvq(rng, bits, ch.n_t);
  return quantize_all(ch, cb);
}

}  // namespace detail

/// Draws channels (and, for bits >= 0, the feedback state) until every
/// required precoder is non-degenerate; failed attempts are counted as
/// resamples. Deterministic given the rng stream.
inline TrialContext make_trial(Rng& rng, const ExperimentConfig& cfg, int bits,
                               const Constellation& cons, bool need_th,
                               bool need_zf) {
  TrialContext ctx;
  for (;;) {
    if (ctx.resamples > 1000)
      throw std::runtime_error(
          "make_trial: persistent rank failure (codebook too small for K?)");
    try {
      ctx.ch = draw_channels(rng, cfg.n_t, cfg.k);
      ctx.perfect = build_perfect(ctx.ch, cons, 1.0);
      if (need_zf) ctx.zf_w = build_zf_perfect(ctx.ch);
      if (bits >= 0) {
        ctx.csi = detail::draw_quantized_csi(rng, ctx.ch, bits, cfg);
        if (need_th) {
          ctx.quantized = build_quantized(ctx.ch, *ctx.csi, cons, 1.0);
          ctx.qsinr_unit = sinr_quantized(ctx.ch, *ctx.csi, *ctx.quantized, 1.0);
        }
        if (need_zf) ctx.zf_w_quant = build_zf_quantized(ctx.ch, *ctx.csi);
      }
      return ctx;
    } catch (const DegenerateChannelError&) {
      ++ctx.resamples;  // e.g. two users selected the same codeword
    }
  }
}

/// Per-user rates of one scheme at one power level, from a prepared trial.
inline std::vector<double> trial_rates(const TrialContext& ctx, Scheme s,
                                       double p_lin) {
  switch (s) {
    case Scheme::kThPerfect: {
      std::vector<double> r = sinr_perfect(ctx.perfect, p_lin);
      for (double& v : r) v = instantaneous_rate(v);
      return r;
    }
    case Scheme::kThQuantized: {
      const QuantizedSinr q = sinr_quantized(ctx.ch, *ctx.csi, *ctx.quantized, p_lin);
      std::vector<double> r(q.gamma.size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = instantaneous_rate(q.gamma[i]);
      return r;
    }
    case Scheme::kZfPerfect:
      return zf_rates(ctx.ch, ctx.zf_w, p_lin);
    case Scheme::kZfQuantized:
      return zf_rates(ctx.ch, ctx.zf_w_quant, p_lin);
  }
  throw std::logic_error("trial_rates: unreachable");
}

// ---------------------------------------------------------------------
// Sweep over (scheme, P_dB, B) cells.

namespace detail {

struct GroupState {
  // per (scheme, p, user) and per (scheme, p) across-user mean
  std::vector<MeanVar> per_user;
  std::vector<MeanVar> across;
  std::size_t resamples = 0;

  void init(std::size_t n_schemes, std::size_t n_p, std::size_t k) {
    if (per_user.empty()) {
      per_user.resize(n_schemes * n_p * k);
      across.resize(n_schemes * n_p);
    }
  }
};

}  // namespace detail

/// Simulates one bits group (bits = -1 for the perfect-CSI-only group)
/// and appends its records.
inline void run_group(const ExperimentConfig& cfg, int bits,
                      const std::vector<Scheme>& schemes, std::uint64_t stream,
                      std::vector<RateRecord>& out) {
  const Constellation cons = make_constellation(cfg.m);
  bool need_th = false, need_zf = false;
  for (Scheme s : schemes) {
    need_th |= (s == Scheme::kThQuantized);
    need_zf |= (s == Scheme::kZfPerfect || s == Scheme::kZfQuantized);
  }
  const std::size_t np = cfg.snr_db.size();
  const std::size_t ns = schemes.size();
  auto states = run_chunked<detail::GroupState>(
      cfg.trials, cfg.workers, cfg.seed, stream,
      [&](std::size_t, Rng& rng, detail::GroupState& st) {
        st.init(ns, np, cfg.k);
        const TrialContext ctx = make_trial(rng, cfg, bits, cons, need_th, need_zf);
        st.resamples += ctx.resamples;
        for (std::size_t si = 0; si < ns; ++si) {
          for (std::size_t pi = 0; pi < np; ++pi) {
            const std::vector<double> r =
                trial_rates(ctx, schemes[si], db_to_linear(cfg.snr_db[pi]));
            double sum = 0.0;
            for (std::size_t u = 0; u < cfg.k; ++u) {
              st.per_user[(si * np + pi) * cfg.k + u].add(r[u]);
              sum += r[u];
            }
            st.across[si * np + pi].add(sum / cfg.k);
          }
        }
      });
  detail::GroupState total;
  total.init(ns, np, cfg.k);
  for (const auto& st : states) {
    if (st.per_user.empty()) continue;
    total.resamples += st.resamples;
    for (std::size_t i = 0; i < total.per_user.size(); ++i)
      total.per_user[i].merge(st.per_user[i]);
    for (std::size_t i = 0; i < total.across.size(); ++i)
      total.across[i].merge(st.across[i]);
  }
  for (std::size_t si = 0; si < ns; ++si) {
    for (std::size_t pi = 0; pi < np; ++pi) {
      for (std::size_t u = 0; u < cfg.k; ++u) {
        const MeanVar& mv = total.per_user[(si * np + pi) * cfg.k + u];
        out.push_back({scheme_name(schemes[si]), cfg.snr_db[pi], bits,
                       static_cast<int>(u), mv.mean(), mv.stderr_mean(),
                       cfg.trials, total.resamples});
      }
      const MeanVar& mv = total.across[si * np + pi];
      out.push_back({scheme_name(schemes[si]), cfg.snr_db[pi], bits, -1,
                     mv.mean(), mv.stderr_mean(), cfg.trials, total.resamples});
    }
  }
}

inline std::vector<RateRecord> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<RateRecord> out;
  std::vector<Scheme> perfect, quantized;
  for (Scheme s : cfg.schemes)
    (is_quantized(s) ? quantized : perfect).push_back(s);
  if (!perfect.empty()) run_group(cfg, -1, perfect, 0, out);
  if (!quantized.empty())
    for (std::size_t bi = 0; bi < cfg.bits.size(); ++bi)
      run_group(cfg, cfg.bits[bi], quantized, 1 + bi, out);
  return out;
}

// ---------------------------------------------------------------------
// Scaled-feedback experiment: B follows the TH scaling rule per SNR point,
// with perfect and quantized rates paired on the same channel draws.

struct ScaledPoint {
  double p_db = 0.0;
  int bits = 0;
  MeanVar perfect;   // across-user mean rate per trial
  MeanVar quantized;
  MeanVar loss;      // paired difference
  std::size_t resamples = 0;
};

struct ScaledCurve {
  std::vector<ScaledPoint> points;
};

inline ScaledCurve run_scaled_feedback(const ExperimentConfig& cfg, double b,
                                       double eps) {
  cfg.validate();
  const Constellation cons = make_constellation(cfg.m);
  ScaledCurve curve;
  for (std::size_t pi = 0; pi < cfg.snr_db.size(); ++pi) {
    const double p_db = cfg.snr_db[pi];
    const SystemParams sp(cfg.n_t, cfg.k, cfg.m, 0, p_db);
    // Floor at the smallest codebook that can keep K quantized directions
    // linearly independent; below that every trial would be resampled.
    const int min_bits = static_cast<int>(std::ceil(std::log2(double(cfg.k)))) + 1;
    const int bits = std::max(
        min_bits, static_cast<int>(std::ceil(feedback_scaling_th(sp, p_db, b, eps))));
    const double p_lin = db_to_linear(p_db);
    struct St {
      MeanVar perfect, quantized, loss;
      std::size_t resamples = 0;
    };
    auto states = run_chunked<St>(
        cfg.trials, cfg.workers, cfg.seed, 100 + pi,
        [&](std::size_t, Rng& rng, St& st) {
          const TrialContext ctx = make_trial(rng, cfg, bits, cons, true, false);
          st.resamples += ctx.resamples;
          double rp = 0.0, rq = 0.0;
          const auto vp = trial_rates(ctx, Scheme::kThPerfect, p_lin);
          const auto vq = trial_rates(ctx, Scheme::kThQuantized, p_lin);
          for (std::size_t u = 0; u < cfg.k; ++u) {
            rp += vp[u];
            rq += vq[u];
          }
          st.perfect.add(rp / cfg.k);
          st.quantized.add(rq / cfg.k);
          st.loss.add((rp - rq) / cfg.k);
        });
    ScaledPoint pt;
    pt.p_db = p_db;
    pt.bits = bits;
    for (const auto& st : states) {
      pt.perfect.merge(st.perfect);
      pt.quantized.merge(st.quantized);
      pt.loss.merge(st.loss);
      pt.resamples += st.resamples;
    }
    curve.points.push_back(pt);
  }
  return curve;
}

/// Horizontal (dB) distance from the quantized point at index i to the
/// perfect-CSI curve at the same rate level, by linear interpolation
/// between grid points.
inline double horizontal_db_gap(const ScaledCurve& c, std::size_t i) {
  const double target = c.points[i].quantized.mean();
  for (std::size_t j = 0; j + 1 < c.points.size(); ++j) {
    const double r0 = c.points[j].perfect.mean();
    const double r1 = c.points[j + 1].perfect.mean();
    if ((target >= r0 && target <= r1) || (target >= r1 && target <= r0)) {
      const double frac = (target - r0) / (r1 - r0);
      const double p_star =
          c.points[j].p_db + frac * (c.points[j + 1].p_db - c.points[j].p_db);
      return c.points[i].p_db - p_star;
    }
  }
  // Below the grid: extrapolate from the first segment.
  const double r0 = c.points[0].perfect.mean();
  const double r1 = c.points[1].perfect.mean();
  const double frac = (target - r0) / (r1 - r0);
  const double p_star = c.points[0].p_db + frac * (c.points[1].p_db - c.points[0].p_db);
  return c.points[i].p_db - p_star;
}

// ---------------------------------------------------------------------
// Paired rate-loss measurement (perfect minus quantized on the same
// channel draws), used by the bound checks.

struct LossMeasurement {
  MeanVar th_loss;      // across-user mean loss per trial
  MeanVar zf_loss;
  MeanVar th_quant_rate;
  std::size_t resamples = 0;
};

inline LossMeasurement measure_loss(const ExperimentConfig& cfg, int bits,
                                    double p_db, std::uint64_t stream) {
  const Constellation cons = make_constellation(cfg.m);
  const double p_lin = db_to_linear(p_db);
  auto states = run_chunked<LossMeasurement>(
      cfg.trials, cfg.workers, cfg.seed, stream,
      [&](std::size_t, Rng& rng, LossMeasurement& st) {
        const TrialContext ctx = make_trial(rng, cfg, bits, cons, true, true);
        st.resamples += ctx.resamples;
        const auto tp = trial_rates(ctx, Scheme::kThPerfect, p_lin);
        const auto tq = trial_rates(ctx, Scheme::kThQuantized, p_lin);
        const auto zp = trial_rates(ctx, Scheme::kZfPerfect, p_lin);
        const auto zq = trial_rates(ctx, Scheme::kZfQuantized, p_lin);
        double dth = 0.0, dzf = 0.0, rq = 0.0;
        for (std::size_t u = 0; u < cfg.k; ++u) {
          dth += tp[u] - tq[u];
          dzf += zp[u] - zq[u];
          rq += tq[u];
        }
        st.th_loss.add(dth / cfg.k);
        st.zf_loss.add(dzf / cfg.k);
        st.th_quant_rate.add(rq / cfg.k);
      });
  LossMeasurement total;
  for (const auto& st : states) {
    total.th_loss.merge(st.th_loss);
    total.zf_loss.merge(st.zf_loss);
    total.th_quant_rate.merge(st.th_quant_rate);
    total.resamples += st.resamples;
  }
  return total;
}

/// Interference-leakage samples eps_1 and eps_K from genuine RVQ trials.
struct EpsSamples {
  std::vector<double> first;
  std::vector<double> last;
  std::vector<double> neg_log2;  // -log2(eps) pooled over users
};

inline EpsSamples collect_eps_samples(std::size_t n_t, std::size_t k, int bits,
                                      std::size_t trials, std::uint64_t seed,
                                      int workers = 1) {
  ExperimentConfig cfg;
  cfg.n_t = n_t;
  cfg.k = k;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.workers = workers;
  const Constellation cons = make_constellation(cfg.m);
  struct St {
    std::vector<double> first, last, neg_log2;
  };
  auto states = run_chunked<St>(
      trials, workers, seed, 7, [&](std::size_t, Rng& rng, St& st) {
        const TrialContext ctx = make_trial(rng, cfg, bits, cons, true, false);
        const auto& eps = ctx.qsinr_unit->eps;
        st.first.push_back(eps.front());
        st.last.push_back(eps.back());
        for (double e : eps)
          if (e > 0.0) st.neg_log2.push_back(-std::log2(e));
      });
  EpsSamples out;
  for (const auto& st : states) {
    out.first.insert(out.first.end(), st.first.begin(), st.first.end());
    out.last.insert(out.last.end(), st.last.begin(), st.last.end());
    out.neg_log2.insert(out.neg_log2.end(), st.neg_log2.begin(), st.neg_log2.end());
  }
  return out;
}

// ---------------------------------------------------------------------
// CSV persistence. Exact header:
//   scheme,P_dB,B,user_index,mean_rate_bits,stderr,trials,resampled

inline std::string format_csv(const std::vector<RateRecord>& records) {
  std::string s = "scheme,P_dB,B,user_index,mean_rate_bits,stderr,trials,resampled\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%s,%g,%d,%d,%.10g,%.10g,%zu,%zu\n",
                  r.scheme.c_str(), r.p_db, r.bits, r.user, r.mean_rate,
                  r.stderr_mean, r.trials, r.resampled);
    s += buf;
  }
  return s;
}

inline void write_csv(const std::string& path, const std::vector<RateRecord>& records) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << format_csv(records);
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace thp
