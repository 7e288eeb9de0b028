#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mdiqkd/channel_model.hpp"
#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/photon_source.hpp"
#include "mdiqkd/scalar_search.hpp"

namespace mdiqkd {

/// Shannon binary entropy in bits, continuous at the endpoints.
inline double binary_entropy(double p) {
  if (!(p >= 0.0) || !(p <= 1.0))
    throw std::invalid_argument("binary_entropy: p must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// Secure key rate and the quantities it was assembled from.
struct KeyRateResult {
  double rate_raw = 0.0;  // may be negative
  double rate = 0.0;      // max(0, rate_raw)
  bool e11_defined = true;  // false when no usable error bound existed

  struct Ingredients {
    double a1s_b1s = 0.0;  // single-photon emission product of the signal pair
    double y11_z = 0.0;    // yield lower bound fed into the privacy term
    double e11_x = 1.0;    // error upper bound (vacuous 1 when undefined)
    double y_ss = 0.0;     // signal-signal gain
    double e_ss = 0.0;     // signal-signal error rate
    double f_ec = 1.0;
  } in;
};

/// Core rate formula
///   R = a1s_b1s * y11 * (1 - H(e11)) - Y_ss * f_ec * H(E_ss),
/// with the privacy factor floored at 0 once e11 >= 0.5 (the bound is vacuous
/// there and H is no longer monotone). An undefined e11 yields no certified
/// privacy at all, so the single-photon term is dropped entirely.
inline KeyRateResult key_rate_core(double a1s_b1s, double y11_z, double e11_x,
                                   bool e11_defined, double y_ss, double e_ss,
                                   double f_ec) {
  if (!(f_ec >= 1.0)) throw std::invalid_argument("key_rate: f_ec must be >= 1");

  KeyRateResult out;
  out.e11_defined = e11_defined;
  out.in = {a1s_b1s, y11_z, e11_x, y_ss, e_ss, f_ec};

  const double correction = y_ss * f_ec * binary_entropy(e_ss);
  double privacy = 0.0;
  if (e11_defined && e11_x < 0.5)
    privacy = a1s_b1s * std::max(0.0, y11_z) * (1.0 - binary_entropy(e11_x));
  out.rate_raw = privacy - correction;
  out.rate = std::max(0.0, out.rate_raw);
  return out;
}

/// Rate from the headline bounds of a pair of basis reports: the Z report
/// supplies the yield bound, the X report the error bound, and the observed
/// signal-signal Z statistics pay the error-correction cost.
inline KeyRateResult key_rate(const BoundReport& report_z, const BoundReport& report_x,
                              const ObservedStatistics& stats_z, const SourceTriple& alice,
                              const SourceTriple& bob, double f_ec) {
  if (report_z.basis != Basis::Z || report_x.basis != Basis::X)
    throw std::invalid_argument("key_rate: reports must carry Z and X basis tags");
  if (stats_z.basis != Basis::Z)
    throw std::invalid_argument("key_rate: statistics must be Z basis");
  if (report_z.n_max != report_x.n_max || report_z.n_max != alice.n_max() ||
      alice.n_max() != bob.n_max())
    throw std::invalid_argument("key_rate: inputs disagree on n_max");

  return key_rate_core(alice.s[1] * bob.s[1], report_z.y11_best, report_x.e11_upper,
                       report_x.e11_defined, stats_z.Y(kIdxS, kIdxS),
                       stats_z.E(kIdxS, kIdxS), f_ec);
}

/// Per-method rate: both the yield bound and the error bound derive from the
/// same estimation method, so method columns are directly comparable.
/// BoundMethod::infinite uses the model truth passed in `truth` instead of a
/// bound (the asymptotic-limit reference curve).
struct MethodTruth {
  double y11 = 0.0;
  double e11 = 0.0;
};

inline KeyRateResult key_rate_for_method(const BoundReport& report_z,
                                         const BoundReport& report_x,
                                         const ObservedStatistics& stats_z,
                                         const SourceTriple& alice, const SourceTriple& bob,
                                         double f_ec, BoundMethod method,
                                         const MethodTruth& truth = {}) {
  if (report_z.basis != Basis::Z || report_x.basis != Basis::X)
    throw std::invalid_argument("key_rate_for_method: reports must carry Z and X tags");
  if (stats_z.basis != Basis::Z)
    throw std::invalid_argument("key_rate_for_method: statistics must be Z basis");

  const double a1s_b1s = alice.s[1] * bob.s[1];
  const double y_ss = stats_z.Y(kIdxS, kIdxS);
  const double e_ss = stats_z.E(kIdxS, kIdxS);

  if (method == BoundMethod::infinite)
    return key_rate_core(a1s_b1s, truth.y11, truth.e11, true, y_ss, e_ss, f_ec);

  const double y11_z = std::max(0.0, bound_value(report_z, method));
  const double y11_x = std::max(0.0, bound_value(report_x, method));
  double e11_x = 1.0;
  bool defined = y11_x > 0.0;
  if (defined) e11_x = bound_e11(report_x.sys, y11_x);
  return key_rate_core(a1s_b1s, y11_z, e11_x, defined, y_ss, e_ss, f_ec);
}

/// Symmetric signal-intensity search: both parties share one source family
/// and the fixed vacuum/decoy intensities, and mu_s = nu_s is swept.
struct OptimizeOptions {
  SourceFamily family = SourceFamily::coherent;
  BoundMethod method = BoundMethod::y11_123;
  int n_max = 20;
  int grid_points = 64;
  double x_tol = 1e-4;
  double mu_s_max = 1.0;
};

struct OptimizationResult {
  double best_intensity = 0.0;
  double best_rate = 0.0;
  bool zero_rate = false;  // the rate vanished over the whole interval
  std::vector<std::pair<double, double>> trace;  // every evaluated (mu_s, rate)
};

/// Maximizes the key rate over the signal intensity mu_s in (mu_d, mu_s_max)
/// with a coarse grid plus golden-section refinement. The best point is the
/// maximum over every evaluation, and all evaluations land in the trace.
inline OptimizationResult optimize_signal_intensity(double mu_v, double mu_d,
                                                    const ChannelParams& channel,
                                                    double f_ec,
                                                    const OptimizeOptions& opts = {}) {
  if (!(mu_v >= 0.0) || !(mu_v < mu_d) || !(mu_d < 1.0))
    throw std::invalid_argument("optimize_signal_intensity: need 0 <= mu_v < mu_d < 1");
  if (!(opts.mu_s_max > mu_d))
    throw std::invalid_argument("optimize_signal_intensity: empty feasible interval");
  if (opts.family == SourceFamily::custom)
    throw std::invalid_argument("optimize_signal_intensity: need a parametric source family");
  channel.validate();

  // Keep strictly inside the open interval; the lower margin also keeps the
  // elimination denominators away from degeneracy.
  const double lo = mu_d + 1e-3;
  const double hi = opts.mu_s_max - 1e-9;
  if (!(lo < hi))
    throw std::invalid_argument("optimize_signal_intensity: empty feasible interval");

  OptimizationResult out;
  auto rate_at = [&](double mu_s) {
    const SourceTriple party = make_family_triple(opts.family, mu_v, mu_d, mu_s, opts.n_max);
    const YieldTable yields_z = true_yields(channel, opts.n_max, Basis::Z);
    const YieldTable yields_x = true_yields(channel, opts.n_max, Basis::X);
    const ObservedStatistics stats_z = observe(party, party, yields_z);
    const ObservedStatistics stats_x = observe(party, party, yields_x);
    const FullReport rep = full_report(stats_z, stats_x, party, party);
    const MethodTruth truth{yields_z.y(1, 1), yields_z.e(1, 1)};
    const KeyRateResult kr = key_rate_for_method(rep.z, rep.x, stats_z, party, party, f_ec,
                                                 opts.method, truth);
    out.trace.emplace_back(mu_s, kr.rate);
    return kr.rate;
  };

  const ScalarMaximum best =
      maximize_on_interval(rate_at, lo, hi, opts.grid_points, opts.x_tol);
  out.best_intensity = best.x;
  out.best_rate = best.value;
  out.zero_rate = !(best.value > 0.0);
  return out;
}

}  // namespace mdiqkd
