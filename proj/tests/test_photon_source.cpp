#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "mdiqkd/photon_source.hpp"

using namespace mdiqkd;
using Catch::Approx;

namespace {

// Reference photon-number weights evaluated with an independent
// high-precision tool (30 significant digits), frozen here.
constexpr double kCoherentHalfP0 = 0.6065306597126334236;   // mu = 0.5
constexpr double kCoherentHalfP1 = 0.3032653298563167118;
constexpr double kCoherentWeakP0 = 0.99004983374916805357;  // mu = 0.01
constexpr double kThermalTenthP0 = 0.90909090909090909091;  // mean = 0.1
constexpr double kThermalTenthP1 = 0.082644628099173553719;
constexpr double kThermalHalfP0 = 0.66666666666666666667;   // mean = 0.5
constexpr double kThermalHalfP1 = 0.22222222222222222222;

std::vector<double> padded(std::vector<double> v, size_t len) {
  v.resize(len, 0.0);
  return v;
}

}  // namespace

TEST_CASE("coherent weights match the frozen reference values") {
  const PhotonDistribution vac = make_coherent(0.0, 10);
  REQUIRE(vac[0] == 1.0);
  for (int k = 1; k <= 10; ++k) REQUIRE(vac[k] == 0.0);

  const PhotonDistribution half = make_coherent(0.5, 20);
  REQUIRE(half[0] == Approx(kCoherentHalfP0).margin(1e-15));
  REQUIRE(half[1] == Approx(kCoherentHalfP1).margin(1e-15));
  REQUIRE(half.intensity_label() == 0.5);

  const PhotonDistribution weak = make_coherent(0.01, 20);
  REQUIRE(weak[0] == Approx(kCoherentWeakP0).margin(1e-15));
}

TEST_CASE("thermal weights match the frozen reference values") {
  const PhotonDistribution vac = make_heralded_pdc(0.0, 10);
  REQUIRE(vac[0] == 1.0);
  REQUIRE(vac[3] == 0.0);

  const PhotonDistribution tenth = make_heralded_pdc(0.1, 20);
  REQUIRE(tenth[0] == Approx(kThermalTenthP0).margin(1e-15));
  REQUIRE(tenth[1] == Approx(kThermalTenthP1).margin(1e-15));

  const PhotonDistribution half = make_heralded_pdc(0.5, 20);
  REQUIRE(half[0] == Approx(kThermalHalfP0).margin(1e-15));
  REQUIRE(half[1] == Approx(kThermalHalfP1).margin(1e-15));
}

TEST_CASE("built-in constructors gate on truncation tail mass") {
  // Coherent tails die fast: mu = 1 fits at the default cutoff but a cutoff
  // of 10 leaves ~1e-8 of mass outside.
  REQUIRE_NOTHROW(make_coherent(1.0, 20));
  REQUIRE_THROWS_AS(make_coherent(1.0, 10), std::invalid_argument);

  // Thermal tails decay geometrically: mean = 1 at cutoff 20 leaves ~4.8e-7
  // (inside that family's gate), at cutoff 18 about 1.9e-6 (outside).
  REQUIRE_NOTHROW(make_heralded_pdc(1.0, 20));
  REQUIRE_THROWS_AS(make_heralded_pdc(1.0, 18), std::invalid_argument);

  // Coherent sources at practical intensities keep tail mass below 1e-12 at
  // the default cutoff.
  for (double mu : {0.01, 0.1, 0.5, 1.0})
    REQUIRE(make_coherent(mu, 20).total_mass() >= 1.0 - 1e-12);
}

TEST_CASE("construction validates arguments") {
  REQUIRE_THROWS_AS(make_coherent(-0.1, 20), std::invalid_argument);
  REQUIRE_THROWS_AS(make_coherent(0.5, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(make_heralded_pdc(-1.0, 20), std::invalid_argument);

  REQUIRE_NOTHROW(make_custom(padded({1.0}, 4)));                  // vacuum
  REQUIRE_NOTHROW(make_custom(padded({0.9, 0.09, 0.01}, 4)));      // sub-normalized
  REQUIRE_THROWS_AS(make_custom(padded({0.0, 1.0}, 4)), std::invalid_argument);
  REQUIRE_THROWS_AS(make_custom(padded({0.5, -0.1}, 4)), std::invalid_argument);
  REQUIRE_THROWS_AS(make_custom(padded({0.9, 0.2}, 4)), std::invalid_argument);
  REQUIRE_THROWS_AS(make_custom({0.9, 0.05, 0.05}), std::invalid_argument);  // n_max < 3
}

TEST_CASE("source triples enforce dimension and ordering invariants") {
  const auto v = make_coherent(0.01, 20);
  const auto d = make_coherent(0.1, 20);
  const auto s = make_coherent(0.5, 20);
  REQUIRE_NOTHROW(SourceTriple(v, d, s));

  REQUIRE_THROWS_AS(SourceTriple(make_coherent(0.01, 10), d, s), std::invalid_argument);
  REQUIRE_THROWS_AS(SourceTriple(v, d, d), InadmissibleTriple);   // identical d and s
  REQUIRE_THROWS_AS(SourceTriple(v, s, d), InadmissibleTriple);   // reversed ordering
}

TEST_CASE("h-ratios follow the closed forms") {
  const SourceTriple triple = make_family_triple(SourceFamily::coherent, 0.01, 0.1, 0.5, 20);
  const HRatioTable t = h_ratios(triple);

  REQUIRE(t.hv(0) == 1.0);
  REQUIRE(t.hd(0) == 1.0);
  REQUIRE(t.hs(0) == 1.0);
  REQUIRE(t.td(0) == 0.0);
  REQUIRE(t.ts(0) == 0.0);

  // Coherent ratios are h_k = mu^k / k!.
  REQUIRE(t.hs(1) == Approx(0.5).margin(1e-15));
  REQUIRE(t.hs(2) == Approx(0.125).margin(1e-15));
  REQUIRE(t.hs(3) == Approx(0.5 * 0.5 * 0.5 / 6.0).margin(1e-15));
  REQUIRE(t.td(1) == Approx(0.09).margin(1e-15));  // 0.1 - 0.01

  // Thermal ratios are h_k = (mean / (1 + mean))^k.
  const SourceTriple th = make_family_triple(SourceFamily::thermal, 0.01, 0.1, 0.5, 20);
  const HRatioTable tt = h_ratios(th);
  REQUIRE(tt.hs(1) == Approx(1.0 / 3.0).margin(1e-15));
  REQUIRE(tt.hs(2) == Approx(1.0 / 9.0).margin(1e-15));
}

TEST_CASE("ratio-monotonicity condition passes for the built-in families") {
  for (SourceFamily fam : {SourceFamily::coherent, SourceFamily::thermal}) {
    const SourceTriple paper = make_family_triple(fam, 0.01, 0.1, 0.5, 20);
    const ConditionVerdict verdict = check_condition(paper);
    INFO(to_string(fam));
    REQUIRE(verdict.pass);
    REQUIRE(verdict.first_violating_k == -1);
    REQUIRE_NOTHROW(require_admissible(paper));
  }

  // A small intensity grid; the full acceptance run covers a denser one.
  const double grid[] = {0.02, 0.1, 0.3, 0.6, 1.0};
  for (SourceFamily fam : {SourceFamily::coherent, SourceFamily::thermal})
    for (double mv : grid)
      for (double md : grid)
        for (double ms : grid) {
          if (!(mv < md && md < ms)) continue;
          REQUIRE(check_condition(make_family_triple(fam, mv, md, ms, 20)).pass);
        }
}

TEST_CASE("ratio-monotonicity condition localizes violations") {
  // Hand-built tables whose k = 2 ratio falls below the k = 1 ratio.
  const auto v = make_custom({0.9, 0.01, 0.001, 0.0001});
  const auto d = make_custom({0.8, 0.1, 0.01, 0.001});
  const auto s = make_custom({0.7, 0.2, 0.011, 0.0011});
  const SourceTriple bad(v, d, s);

  const ConditionVerdict verdict = check_condition(bad);
  REQUIRE_FALSE(verdict.pass);
  REQUIRE(verdict.first_violating_k == 2);
  REQUIRE_THROWS_AS(require_admissible(bad), InadmissibleTriple);
}

TEST_CASE("ratio-monotonicity condition handles vanishing differences") {
  // Power-of-two entries make the h-ratio arithmetic exact. Rows k = 3, 4
  // coincide with the vacuum source's ratios, so both differences vanish.
  const std::vector<double> v = {0.5, 0.015625, 0.00390625, 0.001953125, 0.0009765625};
  const std::vector<double> d = {0.5, 0.0625, 0.015625, 0.001953125, 0.0009765625};
  std::vector<double> s = {0.5, 0.125, 0.0625, 0.001953125, 0.0009765625};

  const SourceTriple vacuous(make_custom(v), make_custom(d), make_custom(s));
  REQUIRE(check_condition(vacuous).pass);

  // Raising only the s row at k = 3 gives h~_3^d = 0 with h~_3^s > 0, which
  // counts as an infinite ratio and passes.
  s[3] = 0.00390625;
  const SourceTriple infinite_ratio(make_custom(v), make_custom(d), make_custom(s));
  REQUIRE(check_condition(infinite_ratio).pass);
}

TEST_CASE("negative photon-number differences are rejected") {
  // The s row dips below the vacuum row at k = 3: h~_3^s < 0.
  const std::vector<double> v = {0.5, 0.015625, 0.00390625, 0.001953125, 0.0009765625};
  const std::vector<double> d = {0.5, 0.0625, 0.015625, 0.001953125, 0.0009765625};
  const std::vector<double> s = {0.5, 0.125, 0.0625, 0.0009765625, 0.0009765625};

  const ConditionVerdict verdict =
      check_condition(SourceTriple(make_custom(v), make_custom(d), make_custom(s)));
  REQUIRE_FALSE(verdict.pass);
  REQUIRE(verdict.first_violating_k == 3);
}

TEST_CASE("family helpers build and name sources") {
  REQUIRE(source_family_from_string("coherent") == SourceFamily::coherent);
  REQUIRE(source_family_from_string("thermal") == SourceFamily::thermal);
  REQUIRE(source_family_from_string("custom") == SourceFamily::custom);
  REQUIRE_FALSE(source_family_from_string("poisson").has_value());
  REQUIRE(std::string(to_string(SourceFamily::thermal)) == "thermal");

  REQUIRE_THROWS_AS(make_family(SourceFamily::custom, 0.5, 20), std::invalid_argument);
  const SourceTriple t = make_family_triple(SourceFamily::thermal, 0.01, 0.1, 0.5, 20);
  REQUIRE(t.n_max() == 20);
  REQUIRE(t.s.intensity_label() == 0.5);
}
