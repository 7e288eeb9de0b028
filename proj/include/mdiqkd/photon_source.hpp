#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mdiqkd/common.hpp"

namespace mdiqkd {

namespace detail {

/// Poissonian photon-number weights e^-mu mu^k / k!, k = 0..n_max.
inline std::vector<double> coherent_weights(double mu, int n_max) {
  std::vector<double> w(size_t(n_max) + 1, 0.0);
  w[0] = std::exp(-mu);
  for (int k = 1; k <= n_max; ++k) w[k] = w[k - 1] * mu / k;
  return w;
}

/// Single-mode thermal (Bose-Einstein) weights mean^k / (1+mean)^(k+1).
inline std::vector<double> thermal_weights(double mean, int n_max) {
  std::vector<double> w(size_t(n_max) + 1, 0.0);
  w[0] = 1.0 / (1.0 + mean);
  const double q = mean / (1.0 + mean);
  for (int k = 1; k <= n_max; ++k) w[k] = w[k - 1] * q;
  return w;
}

}  // namespace detail

/// Truncated photon-number probability vector of one source.
///
/// Entries are probabilities per photon number k = 0..n_max. The vector may
/// be sub-normalized (truncation only removes mass) but the vacuum component
/// must be strictly positive so that the h-ratios p_k / p_0 are defined.
class PhotonDistribution {
public:
  explicit PhotonDistribution(std::vector<double> probs,
                              std::optional<double> intensity_label = std::nullopt)
      : probs_(std::move(probs)), intensity_(intensity_label) {
    if (probs_.size() < 4)
      throw std::invalid_argument("PhotonDistribution: n_max must be >= 3");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p))
        throw std::invalid_argument("PhotonDistribution: entries must be finite and >= 0");
      sum += p;
    }
    if (!(probs_[0] > 0.0))
      throw std::invalid_argument("PhotonDistribution: vacuum component must be > 0");
    if (!(sum > 0.0) || sum > 1.0 + kSumSlack)
      throw std::invalid_argument("PhotonDistribution: probabilities must sum to (0, 1]");
  }

  int n_max() const { return int(probs_.size()) - 1; }
  double operator[](int k) const { return probs_[size_t(k)]; }
  const std::vector<double>& probs() const { return probs_; }
  double vacuum() const { return probs_[0]; }
  std::optional<double> intensity_label() const { return intensity_; }

  double total_mass() const {
    double s = 0.0;
    for (double p : probs_) s += p;
    return s;
  }

  static constexpr double kSumSlack = 1e-12;

private:
  std::vector<double> probs_;
  std::optional<double> intensity_;
};

/// Coherent (Poissonian) source with mean photon number mu, truncated at n_max.
/// Rejects truncations that drop more than 1e-12 of probability mass.
inline PhotonDistribution make_coherent(double mu, int n_max) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("make_coherent: mu must be finite and >= 0");
  if (n_max < 3) throw std::invalid_argument("make_coherent: n_max must be >= 3");
  auto w = detail::coherent_weights(mu, n_max);
  double sum = 0.0;
  for (double p : w) sum += p;
  if (1.0 - sum > 1e-12)
    throw std::invalid_argument("make_coherent: truncation tail mass exceeds 1e-12; raise n_max");
  return PhotonDistribution(std::move(w), mu);
}

/// Heralded-PDC source modeled with single-mode thermal statistics.
/// The geometric tail decays slowly, so the truncation gate is 1e-6.
inline PhotonDistribution make_heralded_pdc(double mean, int n_max) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("make_heralded_pdc: mean must be finite and >= 0");
  if (n_max < 3) throw std::invalid_argument("make_heralded_pdc: n_max must be >= 3");
  auto w = detail::thermal_weights(mean, n_max);
  double sum = 0.0;
  for (double p : w) sum += p;
  if (1.0 - sum > 1e-6)
    throw std::invalid_argument(
        "make_heralded_pdc: truncation tail mass exceeds 1e-6; raise n_max");
  return PhotonDistribution(std::move(w), mean);
}

/// Arbitrary user-supplied photon-number statistics, stored as given
/// (no normalization).
inline PhotonDistribution make_custom(std::vector<double> probs) {
  return PhotonDistribution(std::move(probs));
}

/// The three states {v, d, s} one party can emit, weakest first.
///
/// Construction enforces equal truncation and the strict single-photon
/// ratio ordering h_1^v < h_1^d < h_1^s, which keeps the elimination
/// denominators h~_1^d and h~_1^s strictly positive.
struct SourceTriple {
  PhotonDistribution v;
  PhotonDistribution d;
  PhotonDistribution s;

  SourceTriple(PhotonDistribution v_in, PhotonDistribution d_in, PhotonDistribution s_in)
      : v(std::move(v_in)), d(std::move(d_in)), s(std::move(s_in)) {
    if (v.n_max() != d.n_max() || v.n_max() != s.n_max())
      throw std::invalid_argument("SourceTriple: members must share n_max");
    const double h1v = v[1] / v[0];
    const double h1d = d[1] / d[0];
    const double h1s = s[1] / s[0];
    if (!(h1v < h1d && h1d < h1s))
      throw InadmissibleTriple("SourceTriple: need strict ordering h1^v < h1^d < h1^s");
  }

  int n_max() const { return v.n_max(); }
};

/// Vacuum-normalized photon-number ratios h_k^i = p_k^i / p_0^i of one triple,
/// plus the differences h~_k^i = h_k^i - h_k^v used by the reduced equations.
struct HRatioTable {
  std::vector<double> h_v, h_d, h_s;    // h_k^i, k = 0..n_max
  std::vector<double> ht_d, ht_s;       // h~_k^i, i in {d, s}

  int n_max() const { return int(h_v.size()) - 1; }

  double hv(int k) const { return h_v[size_t(k)]; }
  double hd(int k) const { return h_d[size_t(k)]; }
  double hs(int k) const { return h_s[size_t(k)]; }
  double td(int k) const { return ht_d[size_t(k)]; }
  double ts(int k) const { return ht_s[size_t(k)]; }
};

inline HRatioTable h_ratios(const SourceTriple& triple) {
  const int n = triple.n_max();
  HRatioTable t;
  t.h_v.resize(size_t(n) + 1);
  t.h_d.resize(size_t(n) + 1);
  t.h_s.resize(size_t(n) + 1);
  t.ht_d.resize(size_t(n) + 1);
  t.ht_s.resize(size_t(n) + 1);
  for (int k = 0; k <= n; ++k) {
    t.h_v[k] = triple.v[k] / triple.v[0];
    t.h_d[k] = triple.d[k] / triple.d[0];
    t.h_s[k] = triple.s[k] / triple.s[0];
    t.ht_d[k] = t.h_d[k] - t.h_v[k];
    t.ht_s[k] = t.h_s[k] - t.h_v[k];
  }
  return t;
}

/// Result of the ratio-monotonicity admissibility check.
struct ConditionVerdict {
  bool pass = false;
  int first_violating_k = -1;  // -1 when pass

  explicit operator bool() const { return pass; }
};

namespace detail {

// x >= y up to relative slack; exact-zero margins occur for degenerate
// hand-built inputs.
inline bool ge_with_slack(double x, double y, double rel = 1e-12) {
  const double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
  return x >= y - rel * scale;
}

}  // namespace detail

/// Checks the ratio-monotonicity condition
///   h~_k^s / h~_k^d >= h~_2^s / h~_2^d >= h~_1^s / h~_1^d   for k = 2..n_max.
///
/// k-ratios with h~_k^d = 0 and h~_k^s = 0 are vacuous and skipped;
/// h~_k^d = 0 with h~_k^s > 0 counts as pass for that k (ratio +inf).
/// Returns pass or the first violating k.
inline ConditionVerdict check_condition(const SourceTriple& triple) {
  const HRatioTable t = h_ratios(triple);
  if (!(t.td(1) > 0.0) || !(t.ts(1) > 0.0))
    throw InadmissibleTriple("check_condition: h~_1^d and h~_1^s must be > 0");

  // Negative differences cannot occur for intensity-ordered parametric
  // families and would invalidate the sign arguments behind the bounds.
  for (int k = 1; k <= triple.n_max(); ++k)
    if (t.td(k) < 0.0 || t.ts(k) < 0.0) return {false, k};

  const double r1 = t.ts(1) / t.td(1);

  // Ratio of row k against a reference ratio r; +1 pass, -1 fail, 0 vacuous.
  auto cmp = [&](int k, double r) -> int {
    const double hd = t.td(k), hs = t.ts(k);
    if (hd == 0.0 && hs == 0.0) return 0;
    if (hd == 0.0) return hs > 0.0 ? +1 : -1;
    return detail::ge_with_slack(hs / hd, r) ? +1 : -1;
  };

  // Reference for the k-chain: r2 when defined, else fall back to r1.
  double r2 = r1;
  if (cmp(2, r1) < 0) return {false, 2};
  if (t.td(2) != 0.0) r2 = t.ts(2) / t.td(2);
  else if (t.ts(2) > 0.0) r2 = std::numeric_limits<double>::infinity();

  for (int k = 3; k <= triple.n_max(); ++k) {
    const double hd = t.td(k), hs = t.ts(k);
    if (hd == 0.0 && hs == 0.0) continue;
    if (hd == 0.0) {
      if (hs > 0.0) continue;
      return {false, k};
    }
    if (std::isinf(r2)) return {false, k};  // finite ratio cannot reach +inf
    if (!detail::ge_with_slack(hs / hd, r2)) return {false, k};
  }
  return {true, -1};
}

/// Gate used by the bound pipeline: throws InadmissibleTriple unless
/// check_condition passes.
inline void require_admissible(const SourceTriple& triple, const char* who = "triple") {
  const ConditionVerdict verdict = check_condition(triple);
  if (!verdict.pass)
    throw InadmissibleTriple(std::string("ratio-monotonicity condition fails for ") + who +
                             " at k = " + std::to_string(verdict.first_violating_k));
}

/// Built-in parametric source families; "custom" marks user-supplied tables.
enum class SourceFamily { coherent, thermal, custom };

inline const char* to_string(SourceFamily f) {
  switch (f) {
    case SourceFamily::coherent: return "coherent";
    case SourceFamily::thermal: return "thermal";
    case SourceFamily::custom: return "custom";
  }
  return "?";
}

inline std::optional<SourceFamily> source_family_from_string(const std::string& s) {
  if (s == "coherent") return SourceFamily::coherent;
  if (s == "thermal") return SourceFamily::thermal;
  if (s == "custom") return SourceFamily::custom;
  return std::nullopt;
}

inline PhotonDistribution make_family(SourceFamily family, double intensity, int n_max) {
  switch (family) {
    case SourceFamily::coherent: return make_coherent(intensity, n_max);
    case SourceFamily::thermal: return make_heralded_pdc(intensity, n_max);
    case SourceFamily::custom: break;
  }
  throw std::invalid_argument("make_family: custom sources need explicit tables");
}

inline SourceTriple make_family_triple(SourceFamily family, double mu_v, double mu_d,
                                       double mu_s, int n_max) {
  return SourceTriple(make_family(family, mu_v, n_max), make_family(family, mu_d, n_max),
                      make_family(family, mu_s, n_max));
}

}  // namespace mdiqkd
