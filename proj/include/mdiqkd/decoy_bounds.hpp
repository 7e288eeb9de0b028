#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "mdiqkd/common.hpp"
#include "mdiqkd/photon_source.hpp"

namespace mdiqkd {

// Source indices used across the 3x3 observable matrices.
inline constexpr int kIdxV = 0;
inline constexpr int kIdxD = 1;
inline constexpr int kIdxS = 2;

using Mat3 = std::array<std::array<double, 3>, 3>;

/// The nine observed gains Y_ab and error rates E_ab of one basis,
/// rows indexed by Alice's source (v, d, s) and columns by Bob's.
struct ObservedStatistics {
  Basis basis = Basis::Z;
  Mat3 gains{};
  Mat3 error_rates{};

  ObservedStatistics() = default;
  ObservedStatistics(Basis b, const Mat3& y, const Mat3& e)
      : basis(b), gains(y), error_rates(e) {
    validate();
  }

  void validate() const {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double y = gains[i][j], e = error_rates[i][j];
        if (!std::isfinite(y) || y < 0.0 || y > 1.0)
          throw std::invalid_argument("ObservedStatistics: gains must lie in [0, 1]");
        if (!std::isfinite(e) || e < 0.0 || e > 1.0)
          throw std::invalid_argument("ObservedStatistics: error rates must lie in [0, 1]");
      }
  }

  double Y(int a, int b) const { return gains[a][b]; }
  double E(int a, int b) const { return error_rates[a][b]; }
  /// Error product T_ab = Y_ab * E_ab.
  double T(int a, int b) const { return gains[a][b] * error_rates[a][b]; }
};

/// The four reduced gain values Y~_ij and error products T~_ij (i, j in {d, s})
/// left after Gaussian elimination of all vacuum-involving yields, together
/// with both parties' h-ratio tables.
///
/// Equation order is dd, ds, sd, ss (indices 1..4 in the variant names).
struct ReducedSystem {
  std::array<double, 4> y_tilde{};
  std::array<double, 4> t_tilde{};
  HRatioTable h_a;
  HRatioTable h_b;
  int n_max = 0;

  double y_dd() const { return y_tilde[0]; }
  double y_ds() const { return y_tilde[1]; }
  double y_sd() const { return y_tilde[2]; }
  double y_ss() const { return y_tilde[3]; }
  double t_dd() const { return t_tilde[0]; }
};

/// Reduces the nine gains/error products to the four-equation system.
///
/// Y~_ij = (a0^v b0^v Y_ij - a0^v b0^j Y_iv - a0^i b0^v Y_vj + a0^i b0^j Y_vv)
///         / (a0^v a0^i b0^v b0^j)
/// and likewise for T~_ij with T_ab = Y_ab E_ab. Pure arithmetic; no clamping.
inline ReducedSystem reduce(const ObservedStatistics& stats, const SourceTriple& alice,
                            const SourceTriple& bob) {
  if (alice.n_max() != bob.n_max())
    throw std::invalid_argument("reduce: source triples must share n_max");
  stats.validate();

  ReducedSystem sys;
  sys.h_a = h_ratios(alice);
  sys.h_b = h_ratios(bob);
  sys.n_max = alice.n_max();

  const long double a0v = alice.v[0], b0v = bob.v[0];
  const std::array<long double, 2> a0 = {alice.d[0], alice.s[0]};
  const std::array<long double, 2> b0 = {bob.d[0], bob.s[0]};

  // q = 0 -> i = d, q = 1 -> i = s; same for r/j. Flat equation index
  // 2q + r matches the dd, ds, sd, ss order.
  for (int q = 0; q < 2; ++q)
    for (int r = 0; r < 2; ++r) {
      const int i = q + 1, j = r + 1;  // matrix indices of sources d/s
      const long double num_y = a0v * b0v * (long double)stats.Y(i, j) -
                                a0v * b0[r] * (long double)stats.Y(i, kIdxV) -
                                a0[q] * b0v * (long double)stats.Y(kIdxV, j) +
                                a0[q] * b0[r] * (long double)stats.Y(kIdxV, kIdxV);
      const long double num_t = a0v * b0v * (long double)stats.T(i, j) -
                                a0v * b0[r] * (long double)stats.T(i, kIdxV) -
                                a0[q] * b0v * (long double)stats.T(kIdxV, j) +
                                a0[q] * b0[r] * (long double)stats.T(kIdxV, kIdxV);
      const long double den = a0v * a0[q] * b0v * b0[r];
      sys.y_tilde[2 * q + r] = double(num_y / den);
      sys.t_tilde[2 * q + r] = double(num_t / den);
    }
  return sys;
}

/// A size-3 subset of the four reduced equations {1:dd, 2:ds, 3:sd, 4:ss}.
class EquationSelector {
public:
  EquationSelector(int e1, int e2, int e3) : eqs_{e1, e2, e3} {
    std::sort(eqs_.begin(), eqs_.end());
    if (eqs_[0] < 1 || eqs_[2] > 4 || eqs_[0] == eqs_[1] || eqs_[1] == eqs_[2])
      throw std::invalid_argument("EquationSelector: need three distinct indices in 1..4");
  }

  const std::array<int, 3>& equations() const { return eqs_; }

  std::string name() const {
    return std::to_string(eqs_[0]) + std::to_string(eqs_[1]) + std::to_string(eqs_[2]);
  }

private:
  std::array<int, 3> eqs_;
};

inline const EquationSelector kSel123{1, 2, 3};
inline const EquationSelector kSel124{1, 2, 4};
inline const EquationSelector kSel134{1, 3, 4};
inline const EquationSelector kSel234{2, 3, 4};

// Tolerance below which a residual coefficient counts as non-negative.
inline constexpr double kCoeffTol = 1e-12;

/// One y11 lower-bound variant plus its residual-coefficient diagnostics.
struct VariantResult {
  double value = 0.0;   // raw estimate, unclamped
  double min_f = 0.0;   // min residual coefficient over the truncated J1 set
  bool certified = false;  // min_f >= -kCoeffTol: value is a valid lower bound
};

namespace detail {

inline double det3(const std::array<std::array<double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// h~ row of equation e (1..4) at photon pair (k, l): the coefficient of y_kl.
// i(e) selects Alice's member (d for eq 1,2 / s for eq 3,4), j(e) Bob's.
inline double eq_coeff(const ReducedSystem& sys, int eq, int k, int l) {
  const double ha = (eq <= 2) ? sys.h_a.td(k) : sys.h_a.ts(k);
  const double hb = (eq % 2 == 1) ? sys.h_b.td(l) : sys.h_b.ts(l);
  return ha * hb;
}

// Requires the two second-order elimination denominators
//   h~_a1^d h~_a2^s - h~_a1^s h~_a2^d  and  h~_b1^d h~_b2^s - h~_b1^s h~_b2^d
// to be strictly positive. Every selector's system determinant factors
// through them.
inline void require_positive_denominators(const ReducedSystem& sys) {
  const double det_a = sys.h_a.td(1) * sys.h_a.ts(2) - sys.h_a.ts(1) * sys.h_a.td(2);
  const double det_b = sys.h_b.td(1) * sys.h_b.ts(2) - sys.h_b.ts(1) * sys.h_b.td(2);
  if (!(det_a > 0.0) || !(det_b > 0.0))
    throw InadmissibleTriple("elimination denominators must be strictly positive");
}

}  // namespace detail

/// Estimates y11 from three selected reduced equations by eliminating y12 and
/// y21 (Cramer's rule), and scans the residual coefficients f(m, n) over the
/// truncated multi-photon set J1 = {m, n >= 1, m + n >= 4}.
///
/// For selector {1,2,3} the value coincides with the explicit tightest-bound
/// formula, and for {1,2,4} with the corresponding alternative form. The value
/// is a certified lower bound on y11 exactly when min f >= -kCoeffTol.
inline VariantResult bound_y11_three_eq(const ReducedSystem& sys,
                                        const EquationSelector& sel) {
  detail::require_positive_denominators(sys);

  const auto& eqs = sel.equations();
  std::array<std::array<double, 3>, 3> m{};
  std::array<double, 3> rhs{};
  for (int r = 0; r < 3; ++r) {
    const int e = eqs[r];
    m[r][0] = detail::eq_coeff(sys, e, 1, 1);
    m[r][1] = detail::eq_coeff(sys, e, 1, 2);
    m[r][2] = detail::eq_coeff(sys, e, 2, 1);
    rhs[r] = sys.y_tilde[e - 1];
  }
  const double det = detail::det3(m);
  if (det == 0.0 || !std::isfinite(det))
    throw InadmissibleTriple("bound_y11_three_eq: degenerate equation system");

  auto col0 = [&](const std::array<double, 3>& c) {
    auto mm = m;
    for (int r = 0; r < 3; ++r) mm[r][0] = c[r];
    return detail::det3(mm);
  };

  VariantResult out;
  out.value = col0(rhs) / det;

  double min_f = std::numeric_limits<double>::infinity();
  for (int mm = 1; mm <= sys.n_max; ++mm)
    for (int nn = 1; nn <= sys.n_max; ++nn) {
      if (mm + nn < 4) continue;
      const std::array<double, 3> g = {detail::eq_coeff(sys, eqs[0], mm, nn),
                                       detail::eq_coeff(sys, eqs[1], mm, nn),
                                       detail::eq_coeff(sys, eqs[2], mm, nn)};
      min_f = std::min(min_f, -col0(g) / det);
    }
  out.min_f = std::isfinite(min_f) ? min_f : 0.0;
  out.certified = out.min_f >= -kCoeffTol;
  return out;
}

/// The prior-art two-equation bound built from equations 1 (dd) and 4 (ss).
struct PriorArtBound {
  double y11_14a = 0.0;  // y12 eliminated
  double y11_14b = 0.0;  // y21 eliminated
  double ka = 0.0;       // h~_a1^s h~_b2^s / (h~_a1^d h~_b2^d)
  double kb = 0.0;       // h~_a2^s h~_b1^s / (h~_a2^d h~_b1^d)
  double y11_14 = 0.0;   // min(y11_14a, y11_14b)
  double min_f_14a = 0.0;  // residual coefficients over J2 = {m + n >= 3}
  double min_f_14b = 0.0;
  bool certified = false;  // the Ka/Kb-selected branch has min f >= -kCoeffTol
};

/// Residual coefficients of the two prior-art eliminations at one photon
/// pair (m, n): first = f^(14a), second = f^(14b).
inline std::pair<double, double> prior_art_f(const ReducedSystem& sys, int m, int n) {
  const auto& a = sys.h_a;
  const auto& b = sys.h_b;
  const double det_a = a.td(1) * a.ts(2) - a.ts(1) * a.td(2);
  const double det_b = b.td(1) * b.ts(2) - b.ts(1) * b.td(2);
  const double fa =
      (a.td(1) * b.td(2) * a.ts(m) * b.ts(n) - a.ts(1) * b.ts(2) * a.td(m) * b.td(n)) /
      (a.td(1) * a.ts(1) * det_b);
  const double fb =
      (a.td(2) * b.td(1) * a.ts(m) * b.ts(n) - a.ts(2) * b.ts(1) * a.td(m) * b.td(n)) /
      (b.td(1) * b.ts(1) * det_a);
  return {fa, fb};
}

/// Computes the prior-art pair of estimates, their branch discriminants
/// Ka and Kb, and the compact bound min(y11_14a, y11_14b). Whichever of
/// Ka <= Kb / Ka >= Kb holds certifies the corresponding branch; the min
/// never exceeds the certified branch, so it is a valid bound either way.
inline PriorArtBound bound_y11_14(const ReducedSystem& sys) {
  detail::require_positive_denominators(sys);
  const auto& a = sys.h_a;
  const auto& b = sys.h_b;

  const double det_a = a.td(1) * a.ts(2) - a.ts(1) * a.td(2);
  const double det_b = b.td(1) * b.ts(2) - b.ts(1) * b.td(2);

  PriorArtBound out;
  out.y11_14a =
      (a.ts(1) * b.ts(2) * sys.y_dd() - a.td(1) * b.td(2) * sys.y_ss()) /
      (a.td(1) * a.ts(1) * det_b);
  out.y11_14b =
      (a.ts(2) * b.ts(1) * sys.y_dd() - a.td(2) * b.td(1) * sys.y_ss()) /
      (b.td(1) * b.ts(1) * det_a);
  out.ka = (a.ts(1) * b.ts(2)) / (a.td(1) * b.td(2));
  out.kb = (a.ts(2) * b.ts(1)) / (a.td(2) * b.td(1));
  out.y11_14 = std::min(out.y11_14a, out.y11_14b);

  double min_a = std::numeric_limits<double>::infinity();
  double min_b = min_a;
  for (int m = 1; m <= sys.n_max; ++m)
    for (int n = 1; n <= sys.n_max; ++n) {
      if (m + n < 3) continue;
      const auto [fa, fb] = prior_art_f(sys, m, n);
      min_a = std::min(min_a, fa);
      min_b = std::min(min_b, fb);
    }
  out.min_f_14a = std::isfinite(min_a) ? min_a : 0.0;
  out.min_f_14b = std::isfinite(min_b) ? min_b : 0.0;
  out.certified = (out.ka <= out.kb ? out.min_f_14a : out.min_f_14b) >= -kCoeffTol;
  return out;
}

/// Upper-bounds the single-photon-pair error rate:
///   e11 <= T~_dd / (h~_a1^d h~_b1^d y11).
/// Feeding a lower bound for y11 preserves the upper-bound property.
/// The result is clamped into [0, 1].
inline double bound_e11(const ReducedSystem& sys, double y11_lower) {
  if (!(y11_lower > 0.0))
    throw UndefinedBound("bound_e11: y11 lower bound must be > 0");
  const double raw = sys.t_dd() / (sys.h_a.td(1) * sys.h_b.td(1) * y11_lower);
  return std::min(1.0, std::max(0.0, raw));
}

/// Every bound variant of one basis, raw and clamped, with diagnostics.
/// Keeps the reduced system so further bounds (e.g. method-specific error
/// rates) can be derived from the report alone.
struct BoundReport {
  Basis basis = Basis::Z;
  int n_max = 0;
  ReducedSystem sys;
  VariantResult y11_123, y11_124, y11_134, y11_234;
  PriorArtBound prior;
  double y11_best = 0.0;   // max(0, y11_123)
  double e11_upper = 1.0;  // vacuous when e11_defined is false
  bool e11_defined = false;
};

inline BoundReport make_bound_report(const ReducedSystem& sys, Basis basis) {
  BoundReport rep;
  rep.basis = basis;
  rep.n_max = sys.n_max;
  rep.sys = sys;
  rep.y11_123 = bound_y11_three_eq(sys, kSel123);
  rep.y11_124 = bound_y11_three_eq(sys, kSel124);
  rep.y11_134 = bound_y11_three_eq(sys, kSel134);
  rep.y11_234 = bound_y11_three_eq(sys, kSel234);
  rep.prior = bound_y11_14(sys);
  rep.y11_best = std::max(0.0, rep.y11_123.value);
  if (rep.y11_best > 0.0) {
    rep.e11_upper = bound_e11(sys, rep.y11_best);
    rep.e11_defined = true;
  }
  return rep;
}

/// Per-basis reports of one experiment.
struct FullReport {
  BoundReport z;
  BoundReport x;
};

/// Runs the whole bound pipeline on both bases. The Z-basis report carries
/// the yield bound used for key bits; the X-basis report carries the error
/// bound standing in for the phase-flip rate.
inline FullReport full_report(const ObservedStatistics& stats_z,
                              const ObservedStatistics& stats_x, const SourceTriple& alice,
                              const SourceTriple& bob) {
  if (stats_z.basis != Basis::Z || stats_x.basis != Basis::X)
    throw std::invalid_argument("full_report: basis tags must be Z and X");
  require_admissible(alice, "alice");
  require_admissible(bob, "bob");
  FullReport rep;
  rep.z = make_bound_report(reduce(stats_z, alice, bob), Basis::Z);
  rep.x = make_bound_report(reduce(stats_x, alice, bob), Basis::X);
  return rep;
}

/// Estimation methods selectable in sweeps; "infinite" stands for the
/// asymptotic limit where the model's true y11 is known.
enum class BoundMethod { y11_123, y11_124, y11_134, y11_234, y11_14, infinite };

inline constexpr std::array<BoundMethod, 6> kAllMethods = {
    BoundMethod::y11_123, BoundMethod::y11_124, BoundMethod::y11_134,
    BoundMethod::y11_234, BoundMethod::y11_14,  BoundMethod::infinite};

inline const char* to_string(BoundMethod m) {
  switch (m) {
    case BoundMethod::y11_123: return "y11_123";
    case BoundMethod::y11_124: return "y11_124";
    case BoundMethod::y11_134: return "y11_134";
    case BoundMethod::y11_234: return "y11_234";
    case BoundMethod::y11_14: return "y11_14";
    case BoundMethod::infinite: return "infinite";
  }
  return "?";
}

inline std::optional<BoundMethod> bound_method_from_string(const std::string& s) {
  for (BoundMethod m : kAllMethods)
    if (s == to_string(m)) return m;
  return std::nullopt;
}

/// Raw bound value of one report variant. BoundMethod::infinite has no
/// report-backed value and is rejected.
inline double bound_value(const BoundReport& rep, BoundMethod m) {
  switch (m) {
    case BoundMethod::y11_123: return rep.y11_123.value;
    case BoundMethod::y11_124: return rep.y11_124.value;
    case BoundMethod::y11_134: return rep.y11_134.value;
    case BoundMethod::y11_234: return rep.y11_234.value;
    case BoundMethod::y11_14: return rep.prior.y11_14;
    case BoundMethod::infinite: break;
  }
  throw std::invalid_argument("bound_value: method has no report-backed value");
}

}  // namespace mdiqkd
