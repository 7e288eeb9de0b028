#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace mdiqkd {

struct ScalarMaximum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Maximizes f over [lo, hi] with a coarse uniform scan followed by
/// golden-section refinement around the best grid cell. The reported maximum
/// is the best of *all* evaluated points, so a multi-modal f can never return
/// less than its grid scan saw. Deterministic for a deterministic f.
inline ScalarMaximum maximize_on_interval(const std::function<double(double)>& f, double lo,
                                          double hi, int grid_points = 64,
                                          double x_tol = 1e-4) {
  if (!(lo < hi)) throw std::invalid_argument("maximize_on_interval: need lo < hi");
  if (grid_points < 2) throw std::invalid_argument("maximize_on_interval: need >= 2 grid points");
  if (!(x_tol > 0.0)) throw std::invalid_argument("maximize_on_interval: x_tol must be > 0");

  ScalarMaximum best;
  best.value = -std::numeric_limits<double>::infinity();
  auto eval = [&](double x) {
    const double v = f(x);
    ++best.evaluations;
    if (v > best.value) {
      best.value = v;
      best.x = x;
    }
    return v;
  };

  int best_i = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double x = lo + (hi - lo) * i / (grid_points - 1);
    const double v = eval(x);
    if (v > best_v) {
      best_v = v;
      best_i = i;
    }
  }

  // Refine inside the bracket spanned by the best point's neighbors.
  const double step = (hi - lo) / (grid_points - 1);
  double a = std::max(lo, lo + (best_i - 1) * step);
  double b = std::min(hi, lo + (best_i + 1) * step);

  constexpr double kInvPhi = 0.6180339887498949;  // 1/phi
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  while (b - a > x_tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = eval(x2);
    }
  }
  return best;
}

}  // namespace mdiqkd
