#pragma once

// Canned experiment protocols for the three standard figures, written as
// CSV plus a small matplotlib script.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "thp/harness.hpp"
#include "thp/validation.hpp"

namespace thp {

inline void write_plot_script(const std::string& dir) {
  const char* script = R"PY(#!/usr/bin/env python3
"""Plot the CSV tables produced by `thpsim reproduce`."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    rows = []
    with open(path) as f:
        for r in csv.DictReader(f):
            rows.append({k: (v if k == "scheme" else float(v)) for k, v in r.items()})
    return rows


def plot_rate_vs_snr(path, out):
    curves = defaultdict(list)
    for r in load(path):
        if r["user_index"] == -1:
            curves[(r["scheme"], r["B"])].append((r["P_dB"], r["mean_rate_bits"]))
    plt.figure()
    for (scheme, b), pts in sorted(curves.items()):
        pts.sort()
        label = scheme if b < 0 else f"{scheme} B={int(b)}"
        plt.plot([p for p, _ in pts], [v for _, v in pts], marker="o", label=label)
    plt.xlabel("P (dB)")
    plt.ylabel("mean rate per user (bits)")
    plt.grid(True)
    plt.legend(fontsize=8)
    plt.savefig(out, dpi=150, bbox_inches="tight")


def plot_loss_vs_bits(path, out):
    curves = defaultdict(list)
    for r in load(path):
        if r["user_index"] == -1:
            curves[r["scheme"]].append((r["B"], r["mean_rate_bits"]))
    plt.figure()
    for scheme, pts in sorted(curves.items()):
        pts.sort()
        plt.plot([b for b, _ in pts], [v for _, v in pts], marker="o", label=scheme)
    plt.xlabel("feedback bits B")
    plt.ylabel("mean rate loss per user (bits)")
    plt.grid(True)
    plt.legend(fontsize=8)
    plt.savefig(out, dpi=150, bbox_inches="tight")


if __name__ == "__main__":
    d = sys.argv[1] if len(sys.argv) > 1 else "."
    for name in ("fig2", "fig3"):
        p = os.path.join(d, name + ".csv")
        if os.path.exists(p):
            plot_rate_vs_snr(p, os.path.join(d, name + ".png"))
    p = os.path.join(d, "fig4.csv")
    if os.path.exists(p):
        plot_loss_vs_bits(p, os.path.join(d, "fig4.png"))
)PY";
  std::ofstream f(std::filesystem::path(dir) / "plot.py", std::ios::binary);
  if (!f) throw std::runtime_error("cannot write plot script in " + dir);
  f << script;
}

/// Scaled-feedback sweep (gap targets log2(b) for b = 3 and 4, eps = 0).
inline std::vector<RateRecord> reproduce_fig2(const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.schemes = {Scheme::kThPerfect, Scheme::kThQuantized};
  cfg.validate();
  std::vector<RateRecord> records;
  bool perfect_emitted = false;
  for (double b : {3.0, 4.0}) {
    const ScaledCurve curve = run_scaled_feedback(cfg, b, 0.0);
    const std::string suffix = b == 3.0 ? "_b3" : "_b4";
    for (const ScaledPoint& pt : curve.points) {
      if (!perfect_emitted)
        records.push_back({"th_perfect", pt.p_db, -1, -1, pt.perfect.mean(),
                           pt.perfect.stderr_mean(), cfg.trials, pt.resamples});
      records.push_back({"th_quantized_scaled" + suffix, pt.p_db, pt.bits, -1,
                         pt.quantized.mean(), pt.quantized.stderr_mean(),
                         cfg.trials, pt.resamples});
    }
    perfect_emitted = true;
  }
  return records;
}

/// All four schemes across the SNR grid at B in {4, 8, 15}.
inline std::vector<RateRecord> reproduce_fig3(const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.bits = {4, 8, 15};
  cfg.schemes = {Scheme::kThPerfect, Scheme::kThQuantized, Scheme::kZfPerfect,
                 Scheme::kZfQuantized};
  return run_sweep(cfg);
}

/// Per-user rate loss against B at 25 dB, with both analytical bounds.
/// Loss tables reuse the rate CSV schema; the mean_rate_bits column holds
/// the loss (or bound) in bits.
inline std::vector<RateRecord> reproduce_fig4(const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.validate();
  const double p_db = 25.0;
  std::vector<RateRecord> records;
  for (int bits = 2; bits <= 16; ++bits) {
    const LossMeasurement lm = measure_loss(cfg, bits, p_db, 500 + bits);
    const SystemParams sp(cfg.n_t, cfg.k, cfg.m, bits, p_db);
    const double th_bound = rate_loss_upper_bound(sp);
    const double zf_bound = std::log2(
        1.0 + sp.p_lin * std::exp2(-static_cast<double>(bits) / (cfg.n_t - 1)));
    records.push_back({"th_loss", p_db, bits, -1, lm.th_loss.mean(),
                       lm.th_loss.stderr_mean(), cfg.trials, lm.resamples});
    records.push_back({"zf_loss", p_db, bits, -1, lm.zf_loss.mean(),
                       lm.zf_loss.stderr_mean(), cfg.trials, lm.resamples});
    records.push_back({"th_loss_bound", p_db, bits, -1, th_bound, 0.0, 0, 0});
    records.push_back({"zf_loss_bound", p_db, bits, -1, zf_bound, 0.0, 0, 0});
  }
  return records;
}

inline void reproduce(const std::string& figure, const ExperimentConfig& cfg,
                      const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<RateRecord> records;
  if (figure == "fig2")
    records = reproduce_fig2(cfg);
  else if (figure == "fig3")
    records = reproduce_fig3(cfg);
  else if (figure == "fig4")
    records = reproduce_fig4(cfg);
  else
    throw std::invalid_argument("reproduce: unknown figure " + figure);
  write_csv((std::filesystem::path(out_dir) / (figure + ".csv")).string(), records);
  write_plot_script(out_dir);
}

}  // namespace thp
