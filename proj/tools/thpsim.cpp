// Command-line driver: Monte Carlo sweeps, scaled-feedback runs, the
// validation suite, figure reproduction, and a bound tabulator.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thp/analysis.hpp"
#include "thp/harness.hpp"
#include "thp/reproduce.hpp"
#include "thp/validation.hpp"

namespace {

std::vector<double> parse_snr_grid(const std::string& spec) {
  // "start:step:stop" or a single value
  const auto c1 = spec.find(':');
  if (c1 == std::string::npos) return {std::stod(spec)};
  const auto c2 = spec.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw CLI::ValidationError("--snr-db expects <start:step:stop> or a single value");
  const double start = std::stod(spec.substr(0, c1));
  const double step = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
  const double stop = std::stod(spec.substr(c2 + 1));
  if (!(step > 0.0) || stop < start)
    throw CLI::ValidationError("--snr-db: requires step > 0 and stop >= start");
  std::vector<double> grid;
  for (double p = start; p <= stop + 1e-9; p += step) grid.push_back(p);
  return grid;
}

void emit_records(const std::vector<thp::RateRecord>& records,
                  const std::string& out) {
  if (out.empty())
    std::cout << thp::format_csv(records);
  else
    thp::write_csv(out, records);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiuser MIMO TH precoding simulator with quantized CSI feedback"};
  app.set_config("--config", "", "plain-text key=value config file; flags override");
  app.require_subcommand(1);
  // Shared options may appear after the subcommand name; let unmatched
  // subcommand arguments fall through to the parent parser.
  app.fallthrough();

  thp::ExperimentConfig cfg;
  std::string snr_spec = "0:5:40";
  std::vector<std::string> scheme_names = {"th_perfect", "th_quantized",
                                           "zf_perfect", "zf_quantized"};
  app.add_option("--nt", cfg.n_t, "transmit antennas")->capture_default_str();
  app.add_option("--k", cfg.k, "users")->capture_default_str();
  app.add_option("--m", cfg.m, "constellation size (square)")->capture_default_str();
  app.add_option("--bits", cfg.bits, "feedback bits grid")->capture_default_str();
  app.add_option("--snr-db", snr_spec, "SNR grid <start:step:stop>")->capture_default_str();
  app.add_option("--trials", cfg.trials, "Monte Carlo trials per cell")->capture_default_str();
  app.add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  app.add_option("--schemes", scheme_names, "schemes to simulate")->capture_default_str();
  app.add_option("--out", cfg.out, "output path (CSV) or directory (reproduce)");
  app.add_option("--workers", cfg.workers, "parallel workers")->capture_default_str();
  app.add_option("--direct-sampler-min-bits", cfg.direct_sampler_min_bits,
                 "smallest B simulated without an explicit codebook")
      ->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "sweep schemes over the SNR/bits grids");
  auto* scaled = app.add_subcommand("scaled", "scale B with SNR per the TH feedback rule");
  double gap_b = 3.0, gap_eps = 0.0;
  scaled->add_option("--b", gap_b, "gap target: rate loss stays under log2(b)")
      ->capture_default_str();
  scaled->add_option("--eps", gap_eps, "slack constant in the scaling rule")
      ->capture_default_str();
  auto* validate = app.add_subcommand("validate", "run the statistical validation suite");
  bool quick = false;
  validate->add_flag("--quick", quick, "reduced sample sizes");
  auto* repro = app.add_subcommand("reproduce", "reproduce a standard figure");
  std::string figure;
  repro->add_option("figure", figure, "fig2 | fig3 | fig4")->required();
  auto* bounds = app.add_subcommand("bounds", "tabulate the closed-form expressions");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.snr_db = parse_snr_grid(snr_spec);
    cfg.schemes.clear();
    for (const auto& s : scheme_names) cfg.schemes.push_back(thp::parse_scheme(s));

    if (sim->parsed()) {
      cfg.validate();
      emit_records(thp::run_sweep(cfg), cfg.out);
    } else if (scaled->parsed()) {
      cfg.schemes = {thp::Scheme::kThPerfect, thp::Scheme::kThQuantized};
      cfg.validate();
      const thp::ScaledCurve curve = thp::run_scaled_feedback(cfg, gap_b, gap_eps);
      std::vector<thp::RateRecord> records;
      for (const auto& pt : curve.points) {
        records.push_back({"th_perfect", pt.p_db, -1, -1, pt.perfect.mean(),
                           pt.perfect.stderr_mean(), cfg.trials, pt.resamples});
        records.push_back({"th_quantized_scaled", pt.p_db, pt.bits, -1,
                           pt.quantized.mean(), pt.quantized.stderr_mean(),
                           cfg.trials, pt.resamples});
      }
      emit_records(records, cfg.out);
    } else if (validate->parsed()) {
      thp::ValidationConfig vc;
      vc.seed = cfg.seed;
      vc.workers = cfg.workers;
      vc.quick = quick;
      const auto checks = thp::run_validation(vc);
      const std::string report = thp::format_validation_report(checks);
      if (cfg.out.empty()) {
        std::cout << report;
      } else {
        std::ofstream f(cfg.out, std::ios::binary);
        f << report;
      }
      for (const auto& c : checks)
        if (!c.pass) return 2;
    } else if (repro->parsed()) {
      cfg.validate();
      thp::reproduce(figure, cfg, cfg.out.empty() ? "." : cfg.out);
    } else if (bounds->parsed()) {
      std::printf("quantity,n_T,K,M,B,P_dB,value\n");
      for (int bits : cfg.bits) {
        for (double p_db : cfg.snr_db) {
          const thp::SystemParams sp(cfg.n_t, cfg.k, cfg.m, bits, p_db);
          std::printf("rate_loss_upper_bound,%zu,%zu,%d,%d,%g,%.10g\n", cfg.n_t,
                      cfg.k, cfg.m, bits, p_db, thp::rate_loss_upper_bound(sp));
        }
        std::printf("sum_rate_upper_bound,%zu,%zu,%d,%d,,%.10g\n", cfg.n_t, cfg.k,
                    cfg.m, bits, thp::sum_rate_upper_bound(cfg.n_t, cfg.k, bits));
        std::printf("expected_log2_cos2,%zu,,,%d,,%.10g\n", cfg.n_t, bits,
                    thp::expected_log2_cos2(cfg.n_t, std::ldexp(1.0, bits)));
        std::printf("kershaw_j_bound,%zu,,,%d,,%.10g\n", cfg.n_t, bits,
                    thp::kershaw_j_bound(cfg.n_t, std::ldexp(1.0, bits)));
      }
      if (cfg.k >= 2 && cfg.k < cfg.n_t)
        std::printf("expected_neg_log2_interference,%zu,%zu,,,,%.10g\n", cfg.n_t,
                    cfg.k, thp::expected_neg_log2_interference(cfg.n_t, cfg.k));
      for (double p_db : cfg.snr_db) {
        std::printf("feedback_scaling_zf_b2,%zu,,,,%g,%.10g\n", cfg.n_t, p_db,
                    thp::feedback_scaling_zf(cfg.n_t, p_db, 2.0));
        if (cfg.k >= 2) {
          const thp::SystemParams sp(cfg.n_t, cfg.k, cfg.m, 0, p_db);
          std::printf("feedback_scaling_th_b3,%zu,%zu,%d,,%g,%.10g\n", cfg.n_t,
                      cfg.k, cfg.m, p_db,
                      thp::feedback_scaling_th(sp, p_db, 3.0, 0.0));
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
