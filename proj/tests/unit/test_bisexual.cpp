#include <cmath>

#include "doctest.h"
#include "gwsim/bisexual.hpp"
#include "gwsim/errors.hpp"

using namespace gwsim;

TEST_CASE("mating functions") {
  const MatingFunction min = MatingFunction::Min{};
  CHECK(min(3, 5) == 3);
  const MatingFunction mono = MatingFunction::DaleyMonogamy{};
  CHECK(mono(4, 0) == 0);
  CHECK(mono(4, 2) == 4);
  const MatingFunction poly = MatingFunction::DaleyPolygamy{3};
  CHECK(poly(10, 2) == 6);
  CHECK(poly(4, 2) == 4);
  CHECK_THROWS_AS(MatingFunction(MatingFunction::Custom{[](std::uint64_t x, std::uint64_t y) { return x > y ? x - y : 0; }}),
                  InvalidRule);
}

TEST_CASE("exact m(1) for two children per unit") {
  const auto law = OffspringLaw::explicit_pmf({{2, 1.0}});
  // One female and one male with probability 1/2.
  CHECK(exact_mean_reproduction_per_unit(1, law, 0.5, MatingFunction::Min{}).value() == doctest::Approx(0.5));
  CHECK(exact_mean_reproduction_per_unit(1, law, 0.5, MatingFunction::DaleyMonogamy{}).value() ==
        doctest::Approx(0.5));
  CHECK_FALSE(exact_mean_reproduction_per_unit(1, OffspringLaw::poisson(2.0), 0.5, MatingFunction::Min{}));
}

TEST_CASE("Monte Carlo m(1) matches the series oracle") {
  const auto est = mean_reproduction_per_unit(1, OffspringLaw::poisson(2.0), 0.5, MatingFunction::Min{}, 200000, 4);
  CHECK(std::abs(est.mean - 0.47622238819739127) <= 3 * est.halfwidth);
  CHECK(mean_reproduction_per_unit(3, OffspringLaw::explicit_pmf({{0, 1.0}}), 0.5, MatingFunction::Min{}, 100, 4)
            .mean == 0.0);
}

TEST_CASE("m(k) stays below k m alpha under Min") {
  const auto law = OffspringLaw::poisson(1.5);
  for (std::uint64_t k : {1u, 4u, 16u, 64u}) {
    const auto est = mean_reproduction_per_unit(k, law, 0.5, MatingFunction::Min{}, 20000, k);
    CHECK(est.mean <= 1.5 * 0.5 + 3 * est.halfwidth);
  }
}

TEST_CASE("steps keep sex counts and units consistent") {
  const auto law = OffspringLaw::poisson(2.2);
  const MatingFunction poly = MatingFunction::DaleyPolygamy{2};
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    BisexualState s = initial_units(3);
    const TrialRng rng{17, trial};
    for (int n = 0; n < 15 && s.units > 0; ++n) {
      const auto next = bisexual_step(s, law, 0.4, poly, rng);
      CHECK(next.units == poly(next.females, next.males));
      CHECK(next.generation == s.generation + 1);
      s = next;
    }
    const auto dead = bisexual_step(BisexualState{}, law, 0.4, poly, rng);
    CHECK(dead.units == 0);
    CHECK(dead.females + dead.males == 0);
  }
}

TEST_CASE("units equal the plain process when mating ignores sex") {
  const MatingFunction sum = MatingFunction::Custom{[](std::uint64_t x, std::uint64_t y) { return x + y; }, "x+y"};
  const auto law = OffspringLaw::poisson(1.2);
  BatchSpec plain{.law = law};
  plain.horizon = 30;
  plain.master_seed = 21;
  for (std::size_t trial = 0; trial < 100; ++trial) {
    Trajectory t;
    simulate_trajectory(plain, trial, t);
    BisexualState s = initial_units(1);
    const TrialRng rng{21, trial};
    for (std::size_t n = 1; n <= plain.horizon; ++n) {
      s = bisexual_step(s, law, 0.5, sum, rng);
      REQUIRE(s.units == t.counts[n]);
    }
  }
}

TEST_CASE("unit reproduction check") {
  SUBCASE("subcritical units") {
    const auto r = unit_reproduction_check(OffspringLaw::poisson(1.5), 0.5, MatingFunction::Min{}, 64, 20000, 3);
    CHECK(r.bounded);
    CHECK(r.tail == TailStatus::ClearlyBelowOne);
    CHECK(r.evidence == ExtinctionEvidence::SupportsCertainExtinction);
    CHECK(r.points.back().k == 64);
  }
  SUBCASE("boundary case") {
    const auto r = unit_reproduction_check(OffspringLaw::explicit_pmf({{2, 1.0}}), 0.5,
                                           MatingFunction::DaleyMonogamy{}, 64, 20000, 3);
    CHECK(r.tail == TailStatus::Boundary);
    CHECK(r.evidence == ExtinctionEvidence::BoundaryCase);
  }
  SUBCASE("no offspring") {
    const auto r =
        unit_reproduction_check(OffspringLaw::explicit_pmf({{0, 1.0}}), 0.5, MatingFunction::Min{}, 8, 100, 3);
    for (const auto& p : r.points) CHECK(p.estimate.mean == 0.0);
    CHECK(r.evidence == ExtinctionEvidence::SupportsCertainExtinction);
  }
}

TEST_CASE("bisexual batch goes extinct when units are subcritical") {
  BisexualBatchSpec spec{.law = OffspringLaw::poisson(1.5)};
  spec.initial_units = 5;
  spec.horizon = 200;
  spec.trials = 1000;
  const auto r = run_bisexual_batch(spec);
  CHECK(r.extinction_fraction >= 0.99);
}
