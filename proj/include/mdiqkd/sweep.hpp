#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "mdiqkd/channel_model.hpp"
#include "mdiqkd/common.hpp"
#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/key_rate.hpp"
#include "mdiqkd/scenario.hpp"
#include "mdiqkd/verification.hpp"

namespace mdiqkd {

/// Formats a value with 9 significant digits, the fixed CSV precision.
inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

/// In-memory CSV: a header line plus data rows, "\n" line endings.
struct CsvTable {
  std::string header;
  std::vector<std::string> rows;

  std::string str() const {
    std::string out = header;
    out += '\n';
    for (const auto& r : rows) {
      out += r;
      out += '\n';
    }
    return out;
  }

  void write(const std::string& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file '" + file + "'");
    out << str();
  }
};

/// Everything computed at one sweep point, before column selection.
struct PointEvaluation {
  double loss_db = 0.0;
  double y11_true = 0.0;
  double e11_true = 0.0;
  FullReport report;
  ObservedStatistics stats_z;
  std::vector<KeyRateResult> rates;  // parallel to the scenario's method list
};

/// Evaluates the full pipeline (model -> observation -> bounds -> rates) for
/// one total-loss value of a scenario.
inline PointEvaluation evaluate_point(const Scenario& sc, const SourceTriple& alice,
                                      const SourceTriple& bob, double loss_db) {
  ChannelParams ch = sc.channel;
  ch.total_loss_db = loss_db;

  const int n_max = alice.n_max();
  const YieldTable yields_z = true_yields(ch, n_max, Basis::Z);
  const YieldTable yields_x = true_yields(ch, n_max, Basis::X);
  const ObservedStatistics stats_z = observe(alice, bob, yields_z);
  const ObservedStatistics stats_x = observe(alice, bob, yields_x);

  PointEvaluation pt;
  pt.loss_db = loss_db;
  pt.y11_true = yields_z.y(1, 1);
  pt.e11_true = yields_z.e(1, 1);
  pt.report = full_report(stats_z, stats_x, alice, bob);
  pt.stats_z = stats_z;

  const MethodTruth truth{pt.y11_true, pt.e11_true};
  pt.rates.reserve(sc.methods.size());
  for (BoundMethod m : sc.methods)
    pt.rates.push_back(
        key_rate_for_method(pt.report.z, pt.report.x, stats_z, alice, bob, sc.f_ec, m, truth));
  return pt;
}

/// Loss sweep over all scenario methods. Columns per method m:
///   bound_m   y11 lower-bound value (the model truth for "infinite"),
///   rel_m     bound / true y11,
///   e11_m     error upper bound from the same method (1 when undefined),
///   rate_raw_m, rate_m.
inline CsvTable run_sweep(const Scenario& sc, int threads = 0) {
  const SourceTriple alice = sc.alice.build();
  const SourceTriple bob = sc.bob.build();
  require_admissible(alice, "alice");
  require_admissible(bob, "bob");

  CsvTable csv;
  csv.header = "loss_db,y11_true";
  for (BoundMethod m : sc.methods) {
    const std::string n = to_string(m);
    csv.header += ",bound_" + n + ",rel_" + n + ",e11_" + n + ",rate_raw_" + n + ",rate_" + n;
  }

  const int points = sc.sweep.points();
  csv.rows.resize(size_t(points));
  parallel_for(points, threads, [&](int i) {
    const PointEvaluation pt = evaluate_point(sc, alice, bob, sc.sweep.at(i));
    std::string row = format_value(pt.loss_db) + "," + format_value(pt.y11_true);
    for (size_t mi = 0; mi < sc.methods.size(); ++mi) {
      const BoundMethod m = sc.methods[mi];
      const KeyRateResult& kr = pt.rates[mi];
      double bound, rel, e11;
      if (m == BoundMethod::infinite) {
        bound = pt.y11_true;
        rel = 1.0;
        e11 = pt.e11_true;
      } else {
        bound = bound_value(pt.report.z, m);
        rel = bound / pt.y11_true;
        e11 = kr.e11_defined ? kr.in.e11_x : 1.0;
      }
      row += "," + format_value(bound) + "," + format_value(rel) + "," + format_value(e11) +
             "," + format_value(kr.rate_raw) + "," + format_value(kr.rate);
    }
    csv.rows[size_t(i)] = std::move(row);
  });
  return csv;
}

/// Signal-intensity optimization sweep. Requires a symmetric parametric
/// scenario (both parties same family and same vacuum/decoy intensities).
/// Columns per method m:
///   opt_mu_s_m  maximizing signal intensity in (mu_d, 1),
///   opt_rate_m  rate at the maximizer,
///   rel_rate_m  opt_rate_m / opt_rate_infinite (exactly 1 for "infinite",
///               0 when the reference optimum is 0),
///   zero_rate_m 1 when the rate vanished over the whole interval.
inline CsvTable run_optimize(const Scenario& sc, int threads = 0) {
  if (sc.alice.family == SourceFamily::custom || sc.bob.family == SourceFamily::custom)
    throw std::invalid_argument("optimize: custom sources have no intensity parameter");
  if (sc.alice.family != sc.bob.family ||
      sc.alice.intensities[0] != sc.bob.intensities[0] ||
      sc.alice.intensities[1] != sc.bob.intensities[1])
    throw std::invalid_argument(
        "optimize: alice and bob must share family and vacuum/decoy intensities");
  const double mu_v = sc.alice.intensities[0];
  const double mu_d = sc.alice.intensities[1];
  if (!(mu_d < 1.0))
    throw std::invalid_argument("optimize: mu_d must be < 1 for a nonempty interval");

  CsvTable csv;
  csv.header = "loss_db";
  for (BoundMethod m : sc.methods) {
    const std::string n = to_string(m);
    csv.header +=
        ",opt_mu_s_" + n + ",opt_rate_" + n + ",rel_rate_" + n + ",zero_rate_" + n;
  }

  const int points = sc.sweep.points();
  csv.rows.resize(size_t(points));
  parallel_for(points, threads, [&](int i) {
    ChannelParams ch = sc.channel;
    ch.total_loss_db = sc.sweep.at(i);

    OptimizeOptions opts;
    opts.family = sc.alice.family;
    opts.n_max = sc.alice.n_max;

    // The asymptotic-limit optimum is the denominator of every rel column.
    opts.method = BoundMethod::infinite;
    const OptimizationResult ref = optimize_signal_intensity(mu_v, mu_d, ch, sc.f_ec, opts);

    std::string row = format_value(ch.total_loss_db);
    for (BoundMethod m : sc.methods) {
      OptimizationResult r;
      if (m == BoundMethod::infinite) {
        r = ref;
      } else {
        opts.method = m;
        r = optimize_signal_intensity(mu_v, mu_d, ch, sc.f_ec, opts);
      }
      double rel = 0.0;
      if (m == BoundMethod::infinite)
        rel = 1.0;
      else if (ref.best_rate > 0.0)
        rel = r.best_rate / ref.best_rate;
      row += "," + format_value(r.best_intensity) + "," + format_value(r.best_rate) + "," +
             format_value(rel) + "," + (r.zero_rate ? std::string("1") : std::string("0"));
    }
    csv.rows[size_t(i)] = std::move(row);
  });
  return csv;
}

/// Per-check margins of a verification run, one row per (instance, check).
inline CsvTable margins_csv(const SuiteResult& suite) {
  CsvTable csv;
  csv.header = "instance,seed,n_max,check,pass,skipped,margin";
  for (size_t i = 0; i < suite.reports.size(); ++i) {
    const VerificationReport& rep = suite.reports[i];
    for (const auto& c : rep.checks)
      csv.rows.push_back(std::to_string(i) + "," + std::to_string(rep.seed) + "," +
                         std::to_string(rep.n_max) + "," + c.name + "," +
                         (c.pass ? "1" : "0") + "," + (c.skipped ? "1" : "0") + "," +
                         format_value(c.margin));
  }
  return csv;
}

}  // namespace mdiqkd
