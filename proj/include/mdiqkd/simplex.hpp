#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mdiqkd {

/// Outcome of a linear program solve. `numerical` marks a run whose final
/// point failed verification against the original constraints (or hit the
/// iteration cap) and must not be trusted.
struct LpSolution {
  enum class Status { optimal, infeasible, unbounded, numerical } status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

namespace detail {

// Dense two-phase primal simplex for
//   minimize c.x  subject to  A x = b, x >= 0.
//
// The constraint coefficients here span many orders of magnitude (photon
// weight products), so the system is row- and column-equilibrated before
// solving, pivots prefer the steepest reduced cost with a largest-pivot tie
// break, and Bland's rule takes over only after a degenerate stall (which
// restores the termination guarantee). The final point is checked against
// the unscaled constraints; anything off is reported as Status::numerical
// instead of optimal, so callers never consume a silently-infeasible result.
class SimplexTableau {
public:
  SimplexTableau(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                 const std::vector<double>& c)
      : m_(int(a.size())), n_(int(c.size())), a_(a), b_(b), c_(c) {
    if (int(b.size()) != m_) throw std::invalid_argument("simplex: b size mismatch");
    for (const auto& row : a)
      if (int(row.size()) != n_) throw std::invalid_argument("simplex: A row size mismatch");

    // Equilibrate: rows to unit max entry, then columns to unit max entry.
    // Column scaling substitutes x_j = x'_j / col_scale_j, which keeps
    // x >= 0 intact and is undone on extraction.
    std::vector<std::vector<double>> sa = a_;
    std::vector<double> sb = b_;
    col_scale_.assign(size_t(n_), 1.0);
    for (int i = 0; i < m_; ++i) {
      double r = 0.0;
      for (double v : sa[size_t(i)]) r = std::max(r, std::fabs(v));
      if (r > 0.0) {
        for (double& v : sa[size_t(i)]) v /= r;
        sb[size_t(i)] /= r;
      }
    }
    for (int j = 0; j < n_; ++j) {
      double s = 0.0;
      for (int i = 0; i < m_; ++i) s = std::max(s, std::fabs(sa[size_t(i)][size_t(j)]));
      if (s > 0.0) {
        col_scale_[size_t(j)] = s;
        for (int i = 0; i < m_; ++i) sa[size_t(i)][size_t(j)] /= s;
      }
    }

    // Tableau: n structural + m artificial columns, then the rhs. The
    // sign-normalized scaled system is kept for the final basis re-solve.
    cols_ = n_ + m_;
    t_.assign(size_t(m_) + 1, std::vector<double>(size_t(cols_) + 1, 0.0));
    basis_.resize(size_t(m_));
    for (int i = 0; i < m_; ++i) {
      const double sign = sb[size_t(i)] < 0.0 ? -1.0 : 1.0;
      for (int j = 0; j < n_; ++j) t_[i][j] = sign * sa[size_t(i)][size_t(j)];
      t_[i][size_t(n_ + i)] = 1.0;
      t_[i][size_t(cols_)] = sign * sb[size_t(i)];
      basis_[size_t(i)] = n_ + i;
      for (double& v : sa[size_t(i)]) v *= sign;
      sb[size_t(i)] *= sign;
    }
    sa_ = std::move(sa);
    sb_ = std::move(sb);
  }

  LpSolution solve() {
    // Phase 1: minimize the sum of artificials over all columns.
    std::vector<double> phase1(size_t(cols_), 0.0);
    for (int j = n_; j < cols_; ++j) phase1[size_t(j)] = 1.0;
    load_objective(phase1);
    if (run(cols_) != Run::converged) return {LpSolution::Status::numerical, 0.0, {}};
    if (-t_.back().back() > kFeasTol) return {LpSolution::Status::infeasible, 0.0, {}};

    // Drive leftover artificial variables out of the basis where possible,
    // pivoting on the numerically largest structural entry.
    for (int i = 0; i < m_; ++i) {
      if (basis_[size_t(i)] < n_) continue;
      int enter = -1;
      double best = kPivotTol;
      for (int j = 0; j < n_; ++j)
        if (std::fabs(t_[i][size_t(j)]) > best) {
          best = std::fabs(t_[i][size_t(j)]);
          enter = j;
        }
      if (enter >= 0) pivot(i, enter);
      // Otherwise the row is redundant; its artificial stays at value 0.
    }

    // Phase 2: original (column-scaled) objective; artificial columns are
    // barred from re-entering the basis.
    std::vector<double> phase2(size_t(cols_), 0.0);
    for (int j = 0; j < n_; ++j) phase2[size_t(j)] = c_[size_t(j)] / col_scale_[size_t(j)];
    load_objective(phase2);
    const Run r = run(n_);
    if (r == Run::iteration_cap) return {LpSolution::Status::numerical, 0.0, {}};
    if (r == Run::unbounded) return {LpSolution::Status::unbounded, 0.0, {}};

    LpSolution sol;
    sol.x = extract_point();
    sol.status = verify(sol.x) ? LpSolution::Status::optimal : LpSolution::Status::numerical;
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += c_[size_t(j)] * sol.x[size_t(j)];
    sol.objective = obj;
    return sol;
  }

private:
  static constexpr double kPivotTol = 1e-11;
  static constexpr double kCostTol = 1e-9;
  static constexpr double kFeasTol = 1e-8;
  static constexpr int kStallLimit = 100;
  static constexpr int kIterLimit = 50000;

  enum class Run { converged, unbounded, iteration_cap };

  // Rebuilds the objective row as cost - (basic costs) . rows; the rhs cell
  // then carries minus the current objective value.
  void load_objective(const std::vector<double>& cost) {
    auto& z = t_.back();
    for (int j = 0; j <= cols_; ++j) z[size_t(j)] = j < cols_ ? cost[size_t(j)] : 0.0;
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[size_t(basis_[size_t(i)])];
      if (cb == 0.0) continue;
      for (int j = 0; j <= cols_; ++j) z[size_t(j)] -= cb * t_[i][size_t(j)];
    }
  }

  // Pivots until optimal over the first `allowed` columns. Dantzig entering
  // with a largest-pivot ratio tie break by default; a degenerate stall
  // switches to Bland's rule, whose lowest-index choices cannot cycle.
  Run run(int allowed) {
    bool bland = false;
    int stall = 0;
    double last = -t_.back().back();
    for (int iter = 0; iter < kIterLimit; ++iter) {
      const auto& z = t_.back();
      int enter = -1;
      if (bland) {
        for (int j = 0; j < allowed; ++j)
          if (z[size_t(j)] < -kCostTol) {
            enter = j;
            break;
          }
      } else {
        double best = -kCostTol;
        for (int j = 0; j < allowed; ++j)
          if (z[size_t(j)] < best) {
            best = z[size_t(j)];
            enter = j;
          }
      }
      if (enter < 0) return Run::converged;

      int leave = -1;
      double best_ratio = 0.0, best_piv = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double aij = t_[i][size_t(enter)];
        if (aij <= kPivotTol) continue;
        const double ratio = t_[i][size_t(cols_)] / aij;
        const double tie = 1e-12 * (1.0 + std::fabs(best_ratio));
        if (leave < 0 || ratio < best_ratio - tie) {
          leave = i;
          best_ratio = ratio;
          best_piv = aij;
        } else if (ratio <= best_ratio + tie) {
          const bool take = bland ? basis_[size_t(i)] < basis_[size_t(leave)] : aij > best_piv;
          if (take) {
            leave = i;
            best_ratio = std::min(best_ratio, ratio);
            best_piv = aij;
          }
        }
      }
      if (leave < 0) return Run::unbounded;
      pivot(leave, enter);

      const double now = -t_.back().back();
      if (now < last - 1e-12 * (1.0 + std::fabs(last))) {
        last = now;
        stall = 0;
      } else if (!bland && ++stall > kStallLimit) {
        bland = true;
        stall = 0;
      }
    }
    return Run::iteration_cap;
  }

  void pivot(int row, int col) {
    auto& r = t_[size_t(row)];
    const double p = r[size_t(col)];
    for (double& v : r) v /= p;
    for (int i = 0; i <= m_; ++i) {
      if (i == row) continue;
      auto& ri = t_[size_t(i)];
      const double f = ri[size_t(col)];
      if (f == 0.0) continue;
      for (int j = 0; j <= cols_; ++j) ri[size_t(j)] -= f * r[size_t(j)];
    }
    basis_[size_t(row)] = col;
  }

  // Recovers the final vertex by re-solving the basis system against the
  // scaled input data with long-double elimination, which washes out any
  // drift the pivoted tableau accumulated. Falls back to the tableau rhs if
  // the basis matrix is numerically singular.
  std::vector<double> extract_point() {
    std::vector<double> x(size_t(n_), 0.0);
    std::vector<std::vector<long double>> m(size_t(m_),
                                            std::vector<long double>(size_t(m_) + 1, 0.0L));
    for (int i = 0; i < m_; ++i) {
      for (int k = 0; k < m_; ++k) {
        const int col = basis_[size_t(k)];
        m[size_t(i)][size_t(k)] =
            col < n_ ? sa_[size_t(i)][size_t(col)] : (col - n_ == i ? 1.0L : 0.0L);
      }
      m[size_t(i)][size_t(m_)] = sb_[size_t(i)];
    }
    bool singular = false;
    for (int k = 0; k < m_ && !singular; ++k) {
      int piv = k;
      for (int i = k + 1; i < m_; ++i)
        if (std::fabs(double(m[size_t(i)][size_t(k)])) >
            std::fabs(double(m[size_t(piv)][size_t(k)])))
          piv = i;
      if (std::fabs(double(m[size_t(piv)][size_t(k)])) < 1e-300) {
        singular = true;
        break;
      }
      std::swap(m[size_t(k)], m[size_t(piv)]);
      for (int i = k + 1; i < m_; ++i) {
        const long double f = m[size_t(i)][size_t(k)] / m[size_t(k)][size_t(k)];
        if (f == 0.0L) continue;
        for (int j = k; j <= m_; ++j) m[size_t(i)][size_t(j)] -= f * m[size_t(k)][size_t(j)];
      }
    }
    if (singular) {
      for (int i = 0; i < m_; ++i)
        if (basis_[size_t(i)] < n_)
          x[size_t(basis_[size_t(i)])] =
              t_[i][size_t(cols_)] / col_scale_[size_t(basis_[size_t(i)])];
      return x;
    }
    std::vector<long double> xb(size_t(m_), 0.0L);
    for (int k = m_ - 1; k >= 0; --k) {
      long double acc = m[size_t(k)][size_t(m_)];
      for (int j = k + 1; j < m_; ++j) acc -= m[size_t(k)][size_t(j)] * xb[size_t(j)];
      xb[size_t(k)] = acc / m[size_t(k)][size_t(k)];
    }
    for (int k = 0; k < m_; ++k)
      if (basis_[size_t(k)] < n_)
        x[size_t(basis_[size_t(k)])] =
            double(xb[size_t(k)]) / col_scale_[size_t(basis_[size_t(k)])];
    return x;
  }

  // Checks the candidate point against the unscaled constraints. Slightly
  // negative coordinates (degenerate basics of an ill-conditioned basis) are
  // clamped to zero first; the residual test below then decides whether the
  // clamped point still satisfies the equations, so the clamp threshold can
  // be loose without admitting an infeasible answer. Any residual beyond
  // 1e-8 of the row's own magnitude rejects the solve.
  bool verify(std::vector<double>& x) {
    double xmax = 0.0;
    for (double v : x) xmax = std::max(xmax, std::fabs(v));
    for (double& v : x) {
      if (v < 0.0) {
        if (v < -1e-6 * std::max(1.0, xmax)) return false;
        v = 0.0;
      }
    }
    for (int i = 0; i < m_; ++i) {
      double lhs = 0.0, mag = 0.0;
      for (int j = 0; j < n_; ++j) {
        const double term = a_[size_t(i)][size_t(j)] * x[size_t(j)];
        lhs += term;
        mag += std::fabs(term);
      }
      const double scale = std::max({std::fabs(b_[size_t(i)]), mag, 1e-300});
      if (std::fabs(lhs - b_[size_t(i)]) > 1e-8 * scale) return false;
    }
    return true;
  }

  int m_, n_, cols_;
  std::vector<std::vector<double>> a_;
  std::vector<double> b_;
  std::vector<double> c_;
  std::vector<std::vector<double>> sa_;
  std::vector<double> sb_;
  std::vector<double> col_scale_;
  std::vector<std::vector<double>> t_;
  std::vector<int> basis_;
};

}  // namespace detail

/// Minimizes c.x subject to A x = b and x >= 0.
inline LpSolution solve_lp_min(const std::vector<std::vector<double>>& a,
                               const std::vector<double>& b, const std::vector<double>& c) {
  return detail::SimplexTableau(a, b, c).solve();
}

}  // namespace mdiqkd
