#pragma once

// Rayleigh multiuser channel draws, with each user's row split into its
// norm rho_k and unit direction hbar_k.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "thp/linalg.hpp"
#include "thp/random.hpp"

namespace thp {

struct ChannelSet {
  std::size_t n_t = 0;
  std::size_t k = 0;
  CMatrix h;                       // K x n_T
  std::vector<double> rho;         // ||h_k||
  std::vector<CVector> hbar;       // unit direction rows
};

inline ChannelSet draw_channels(Rng& rng, std::size_t n_t, std::size_t k) {
  if (k < 1 || k > n_t)
    throw std::invalid_argument("draw_channels: requires 1 <= K <= n_T");
  ChannelSet cs;
  cs.n_t = n_t;
  cs.k = k;
  cs.h = CMatrix(k, n_t);
  cs.rho.resize(k);
  cs.hbar.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    CVector row(n_t);
    double r;
    do {
      for (auto& z : row) z = rng.cgauss();
      r = norm(row);
    } while (r < 1e-12);  // probability-zero degenerate draw
    cs.rho[i] = r;
    cs.hbar[i].resize(n_t);
    for (std::size_t j = 0; j < n_t; ++j) {
      cs.h(i, j) = row[j];
      cs.hbar[i][j] = row[j] / r;
    }
  }
  return cs;
}

}  // namespace thp
