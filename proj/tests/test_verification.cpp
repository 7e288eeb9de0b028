#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mdiqkd/verification.hpp"

using namespace mdiqkd;
using Catch::Approx;

namespace {

// Single-pair ground truth over truncated coherent tables; the truncation
// itself is the model here, so small n_max needs no tail gate.
SyntheticInstance single_pair_instance(double y11, double e11, int n_max = 6) {
  const auto src = [&](double mu) {
    return make_custom(detail::coherent_weights(mu, n_max));
  };
  const SourceTriple party(src(0.01), src(0.1), src(0.4));
  YieldTable tab(Basis::Z, n_max);
  tab.y(1, 1) = y11;
  tab.t(1, 1) = y11 * e11;
  return SyntheticInstance{party, party, std::move(tab), 99};
}

}  // namespace

TEST_CASE("forward model on elementary tables") {
  const SourceTriple alice = make_family_triple(SourceFamily::coherent, 0.01, 0.1, 0.5, 12);
  const SourceTriple bob = make_family_triple(SourceFamily::thermal, 0.02, 0.15, 0.5, 12);

  SECTION("zero table") {
    const SyntheticInstance inst{alice, bob, YieldTable(Basis::Z, 12), 0};
    const ObservedStatistics stats = forward(inst);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        REQUIRE(stats.Y(a, b) == 0.0);
        REQUIRE(stats.E(a, b) == 0.0);
      }
  }

  SECTION("single-pair table factors into emission probabilities") {
    YieldTable tab(Basis::Z, 12);
    tab.y(1, 1) = 0.25;
    const SyntheticInstance inst{alice, bob, std::move(tab), 0};
    const ObservedStatistics stats = forward(inst);
    const PhotonDistribution* a_srcs[3] = {&alice.v, &alice.d, &alice.s};
    const PhotonDistribution* b_srcs[3] = {&bob.v, &bob.d, &bob.s};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        REQUIRE(stats.Y(a, b) ==
                Approx((*a_srcs[a])[1] * (*b_srcs[b])[1] * 0.25).epsilon(1e-12));
  }

  SECTION("uniform table scales with total source mass") {
    YieldTable tab(Basis::Z, 12);
    for (int k = 0; k <= 12; ++k)
      for (int l = 0; l <= 12; ++l) tab.y(k, l) = 0.4;
    const SyntheticInstance inst{alice, bob, std::move(tab), 0};
    const ObservedStatistics stats = forward(inst);
    REQUIRE(stats.Y(kIdxS, kIdxS) ==
            Approx(0.4 * alice.s.total_mass() * bob.s.total_mass()).epsilon(1e-12));
  }

  SECTION("dimension mismatch is rejected") {
    const SyntheticInstance inst{alice, bob, YieldTable(Basis::Z, 9), 0};
    REQUIRE_THROWS_AS(forward(inst), std::invalid_argument);
  }
}

TEST_CASE("instance checker validates a clean instance") {
  const SyntheticInstance inst = single_pair_instance(0.2, 0.1);
  const VerificationReport rep = check_instance(inst, true);

  REQUIRE(rep.all_pass());
  REQUIRE(rep.seed == 99);

  // Exact recovery: every variant equals the true value, so the underbound
  // margins sit at the 1e-9 slack.
  for (const char* name : {"underbound_123", "underbound_124", "underbound_134",
                           "underbound_234", "underbound_14"}) {
    const CheckResult* c = rep.find(name);
    REQUIRE(c != nullptr);
    REQUIRE(c->pass);
    REQUIRE(c->margin == Approx(1e-9).epsilon(0.2));
  }

  const CheckResult* e11 = rep.find("e11_safety");
  REQUIRE(e11 != nullptr);
  REQUIRE_FALSE(e11->skipped);
  REQUIRE(e11->pass);

  const CheckResult* lp = rep.find("lp_tightness");
  REQUIRE(lp != nullptr);
  REQUIRE_FALSE(lp->skipped);
  REQUIRE(lp->pass);
}

TEST_CASE("instance checker refuses inadmissible sources") {
  const SourceTriple bad(make_custom({0.9, 0.01, 0.001, 0.0001}),
                         make_custom({0.8, 0.1, 0.01, 0.001}),
                         make_custom({0.7, 0.2, 0.011, 0.0011}));
  SyntheticInstance inst{bad, bad, YieldTable(Basis::Z, 3), 0};
  inst.yields.y(1, 1) = 0.1;
  REQUIRE_THROWS_AS(check_instance(inst), InadmissibleTriple);
}

TEST_CASE("randomized instances are reproducible") {
  const SyntheticInstance a = random_instance(17, 6);
  const SyntheticInstance b = random_instance(17, 6);
  REQUIRE(a.alice.s.probs() == b.alice.s.probs());
  REQUIRE(a.yields.y(1, 1) == b.yields.y(1, 1));
  REQUIRE(a.yields.t(3, 2) == b.yields.t(3, 2));

  const SyntheticInstance c = random_instance(18, 6);
  REQUIRE(a.yields.y(1, 1) != c.yields.y(1, 1));

  REQUIRE_THROWS_AS(random_instance(1, 2), std::invalid_argument);
}

TEST_CASE("property suite over random instances") {
  SuiteOptions opts;
  opts.instances = 60;
  opts.seed = 1;
  opts.n_max_cycle = {4, 6};
  opts.lp = true;

  const SuiteResult res = run_suite(opts);
  REQUIRE(res.instances == 60);
  REQUIRE(res.failed_instances == 0);
  REQUIRE(res.all_pass());
  REQUIRE(res.reports.size() == 60);
  REQUIRE(res.lp_evaluated == 60);  // n_max <= 6 everywhere
  REQUIRE(res.worst_margin >= 0.0);
  REQUIRE_FALSE(res.worst_check.empty());

  SECTION("independent of thread count") {
    SuiteOptions serial = opts;
    serial.threads = 1;
    const SuiteResult res1 = run_suite(serial);
    REQUIRE(res1.worst_margin == res.worst_margin);
    REQUIRE(res1.worst_check == res.worst_check);
    for (size_t i = 0; i < res.reports.size(); ++i) {
      REQUIRE(res1.reports[i].seed == res.reports[i].seed);
      REQUIRE(res1.reports[i].checks.size() == res.reports[i].checks.size());
      for (size_t j = 0; j < res.reports[i].checks.size(); ++j)
        REQUIRE(res1.reports[i].checks[j].margin == res.reports[i].checks[j].margin);
    }
  }

  SECTION("option validation") {
    SuiteOptions bad = opts;
    bad.instances = 0;
    REQUIRE_THROWS_AS(run_suite(bad), std::invalid_argument);
    bad = opts;
    bad.n_max_cycle = {};
    REQUIRE_THROWS_AS(run_suite(bad), std::invalid_argument);
    bad = opts;
    bad.n_max_cycle = {4, 2};
    REQUIRE_THROWS_AS(run_suite(bad), std::invalid_argument);
  }
}

TEST_CASE("simplex solver on known programs") {
  using Status = LpSolution::Status;

  SECTION("bounded optimum") {
    // min x0 + 2 x1 s.t. x0 + x1 = 1 -> x = (1, 0), objective 1.
    const LpSolution sol = solve_lp_min({{1.0, 1.0}}, {1.0}, {1.0, 2.0});
    REQUIRE(sol.status == Status::optimal);
    REQUIRE(sol.objective == Approx(1.0).margin(1e-9));
    REQUIRE(sol.x[0] == Approx(1.0).margin(1e-9));
    REQUIRE(sol.x[1] == Approx(0.0).margin(1e-9));
  }

  SECTION("two constraints") {
    // min x2 s.t. x0 + x2 = 2, x1 + x2 = 3 -> x2 = 0 feasible, objective 0.
    const LpSolution sol =
        solve_lp_min({{1.0, 0.0, 1.0}, {0.0, 1.0, 1.0}}, {2.0, 3.0}, {0.0, 0.0, 1.0});
    REQUIRE(sol.status == Status::optimal);
    REQUIRE(sol.objective == Approx(0.0).margin(1e-9));
  }

  SECTION("negative right-hand sides are normalized") {
    // -x0 = -2 -> x0 = 2.
    const LpSolution sol = solve_lp_min({{-1.0, 0.0}}, {-2.0}, {1.0, 0.0});
    REQUIRE(sol.status == Status::optimal);
    REQUIRE(sol.x[0] == Approx(2.0).margin(1e-9));
  }

  SECTION("infeasible") {
    const LpSolution sol = solve_lp_min({{1.0}, {1.0}}, {1.0, 2.0}, {1.0});
    REQUIRE(sol.status == Status::infeasible);
  }

  SECTION("unbounded") {
    // min -x0 s.t. x0 - x1 = 1: x0 = 1 + x1 grows without limit.
    const LpSolution sol = solve_lp_min({{1.0, -1.0}}, {1.0}, {-1.0, 0.0});
    REQUIRE(sol.status == Status::unbounded);
  }

  SECTION("size mismatches are rejected") {
    REQUIRE_THROWS_AS(solve_lp_min({{1.0, 1.0}}, {1.0, 2.0}, {1.0, 1.0}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(solve_lp_min({{1.0}}, {1.0}, {1.0, 1.0}), std::invalid_argument);
  }
}

TEST_CASE("linear-program floor for the yield bound") {
  SECTION("single-pair support pins the program to the truth") {
    const SyntheticInstance inst = single_pair_instance(0.3, 0.0, 5);
    const std::optional<double> lp = lp_tightness(inst);
    REQUIRE(lp.has_value());
    REQUIRE(*lp == Approx(0.3).margin(1e-7));
  }

  SECTION("dimension limit returns nothing") {
    const SyntheticInstance inst = random_instance(5, 8);
    REQUIRE_FALSE(lp_tightness(inst).has_value());
    REQUIRE(lp_tightness(inst, 8).has_value());
  }

  SECTION("floor respects the closed-form bound on random instances") {
    for (std::uint64_t seed = 30; seed < 36; ++seed) {
      const SyntheticInstance inst = random_instance(seed, 4);
      const std::optional<double> lp = lp_tightness(inst);
      REQUIRE(lp.has_value());
      const ReducedSystem sys = reduce(forward(inst), inst.alice, inst.bob);
      const double y123 = bound_y11_three_eq(sys, kSel123).value;
      INFO("seed " << seed);
      REQUIRE(*lp >= y123 - 1e-9);
      REQUIRE(*lp <= inst.y11_true() + 1e-9);
    }
  }
}
