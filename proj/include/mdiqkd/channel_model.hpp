#pragma once

#include <cmath>
#include <stdexcept>

#include "mdiqkd/common.hpp"
#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/photon_source.hpp"

namespace mdiqkd {

/// Symmetric linear-loss channel to an untrusted middle node.
struct ChannelParams {
  double total_loss_db = 30.0;  // end-to-end Alice->Bob attenuation
  double zeta = 1.0;            // detector efficiency folded into each half
  double p_d = 3e-6;            // dark-count probability per detector
  double e_d = 0.015;           // misalignment error of detected pairs
  double e_0 = 0.5;             // error rate of vacuum-origin clicks

  void validate() const {
    if (!std::isfinite(total_loss_db) || total_loss_db < 0.0)
      throw std::invalid_argument("ChannelParams: total_loss_db must be >= 0");
    if (!std::isfinite(zeta) || zeta <= 0.0 || zeta > 1.0)
      throw std::invalid_argument("ChannelParams: zeta must be in (0, 1]");
    if (!std::isfinite(p_d) || p_d < 0.0 || p_d >= 1.0)
      throw std::invalid_argument("ChannelParams: p_d must be in [0, 1)");
    if (!std::isfinite(e_d) || e_d < 0.0 || e_d > 0.5)
      throw std::invalid_argument("ChannelParams: e_d must be in [0, 0.5]");
    if (!std::isfinite(e_0) || e_0 < 0.0 || e_0 > 1.0)
      throw std::invalid_argument("ChannelParams: e_0 must be in [0, 1]");
  }

  /// Amplitude transmittance of one half link: each party sits at half the
  /// total attenuation, so xi = 10^(-total_loss_db / 20).
  double half_transmittance() const { return std::pow(10.0, -total_loss_db / 20.0); }

  /// Detection efficiency seen by k photons launched from one side.
  double eta_half() const { return half_transmittance() * zeta; }
};

/// Photon-number-resolved yields y_kl and error products t_kl = y_kl e_kl of
/// one basis. These are the model ground truth the decoy analysis bounds.
struct YieldTable {
  Basis basis = Basis::Z;
  PairTable y;
  PairTable t;

  YieldTable() = default;
  YieldTable(Basis b, int n_max) : basis(b), y(n_max), t(n_max) {}

  int n_max() const { return y.n_max(); }

  /// Conditional error rate; 0 where the yield itself vanishes.
  double e(int k, int l) const {
    const double yy = y(k, l);
    return yy > 0.0 ? t(k, l) / yy : 0.0;
  }

  void validate() const {
    if (y.n_max() != t.n_max())
      throw std::invalid_argument("YieldTable: y and t must share n_max");
    for (int k = 0; k <= n_max(); ++k)
      for (int l = 0; l <= n_max(); ++l) {
        const double yy = y(k, l), tt = t(k, l);
        if (!std::isfinite(yy) || yy < 0.0 || yy > 1.0)
          throw std::invalid_argument("YieldTable: yields must lie in [0, 1]");
        if (!std::isfinite(tt) || tt < 0.0 || tt > yy + 1e-15)
          throw std::invalid_argument("YieldTable: error products must lie in [0, y]");
      }
  }
};

/// Reference detection model: each side clicks when at least one photon
/// survives its half link or a dark count fires, independently,
///   y_kl = [1 - (1 - p_d)(1 - eta)^k] [1 - (1 - p_d)(1 - eta)^l],
/// and the error rate is e_0 whenever either side sent vacuum, e_d otherwise.
/// Both bases share these tables in this model.
inline YieldTable true_yields(const ChannelParams& ch, int n_max, Basis basis = Basis::Z) {
  ch.validate();
  if (n_max < 1) throw std::invalid_argument("true_yields: n_max must be >= 1");

  const double eta = ch.eta_half();
  YieldTable tab(basis, n_max);

  std::vector<double> click(n_max + 1);  // click probability of one side given k photons
  for (int k = 0; k <= n_max; ++k)
    click[k] = 1.0 - (1.0 - ch.p_d) * std::pow(1.0 - eta, k);

  for (int k = 0; k <= n_max; ++k)
    for (int l = 0; l <= n_max; ++l) {
      const double y = click[k] * click[l];
      const double e = (k == 0 || l == 0) ? ch.e_0 : ch.e_d;
      tab.y(k, l) = y;
      tab.t(k, l) = y * e;
    }
  return tab;
}

/// Folds photon-number statistics over the yield table into the nine
/// observable gain / error-rate pairs:
///   Y_ab = sum_kl a_k b_l y_kl,  E_ab = (sum_kl a_k b_l t_kl) / Y_ab.
/// Accumulation runs in extended precision so downstream eliminations see
/// inputs consistent with the model to near machine accuracy.
inline ObservedStatistics observe(const SourceTriple& alice, const SourceTriple& bob,
                                  const YieldTable& yields) {
  if (alice.n_max() != bob.n_max())
    throw std::invalid_argument("observe: source triples must share n_max");
  if (alice.n_max() != yields.n_max())
    throw std::invalid_argument("observe: yields n_max must match the sources");
  yields.validate();

  const PhotonDistribution* a_srcs[3] = {&alice.v, &alice.d, &alice.s};
  const PhotonDistribution* b_srcs[3] = {&bob.v, &bob.d, &bob.s};
  const int n = yields.n_max();

  ObservedStatistics stats;
  stats.basis = yields.basis;
  for (int ai = 0; ai < 3; ++ai)
    for (int bi = 0; bi < 3; ++bi) {
      const PhotonDistribution& pa = *a_srcs[ai];
      const PhotonDistribution& pb = *b_srcs[bi];
      long double gain = 0.0L, err = 0.0L;
      for (int k = 0; k <= n; ++k) {
        long double row_y = 0.0L, row_t = 0.0L;
        for (int l = 0; l <= n; ++l) {
          row_y += (long double)pb[l] * (long double)yields.y(k, l);
          row_t += (long double)pb[l] * (long double)yields.t(k, l);
        }
        gain += (long double)pa[k] * row_y;
        err += (long double)pa[k] * row_t;
      }
      stats.gains[ai][bi] = double(gain);
      stats.error_rates[ai][bi] = gain > 0.0L ? double(err / gain) : 0.0;
    }
  stats.validate();
  return stats;
}

}  // namespace mdiqkd
