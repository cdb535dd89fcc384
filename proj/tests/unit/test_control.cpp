#include <cmath>
#include <vector>

#include "doctest.h"
#include "gwsim/control.hpp"
#include "gwsim/engine.hpp"
#include "gwsim/errors.hpp"

using namespace gwsim;

namespace {
const auto kHalfQuarter = OffspringLaw::explicit_pmf({{0, 0.25}, {2, 0.75}});
}

TEST_CASE("integer function forms") {
  const auto logcap = IntegerFunction::logarithmic(2.0, 3.0, Rounding::Ceil);
  CHECK(logcap(0) == 0);
  CHECK(logcap(1) == 2);
  CHECK(logcap(2) == 2);
  CHECK(logcap(8) == 4);
  CHECK(logcap(2000) == 14);
  CHECK(IntegerFunction::logarithmic(2.0, 3.0, Rounding::Ceil, 0.0, 1)(0) == 1);
  CHECK(IntegerFunction::logarithmic(1.0, 10.0)(999) == 3);
  CHECK(IntegerFunction::linear(0.5, 2.0)(5) == 4);
  CHECK(IntegerFunction::linear(-1.0, 2.0)(5) == 0);
  CHECK(IntegerFunction::identity()(17) == 17);
  const auto table = IntegerFunction::table({4, 2, 7});
  CHECK(table(1) == 2);
  CHECK(table(50) == 7);
  CHECK_THROWS_AS(IntegerFunction::logarithmic(1.0, 1.0), DomainError);
}

TEST_CASE("truncation caps the offspring") {
  const auto g = IntegerFunction::constant(3);
  CHECK(apply_truncation(2, 1, g) == 2);
  CHECK(apply_truncation(10, 1, g) == 3);
  CHECK(apply_truncation(0, 5, g) == 0);
}

TEST_CASE("policy invariants") {
  CHECK_THROWS_AS(validate_policy(policies::Truncation{IntegerFunction::logarithmic(2.0, 3.0, Rounding::Ceil)}),
                  DomainError);
  CHECK_NOTHROW(validate_policy(policies::Truncation{IntegerFunction::constant(3)}));
  const ControlPolicy phi = policies::Phi{IntegerFunction::linear(1.0, 1.0)};
  CHECK_FALSE(zero_is_absorbing(&phi));
  CHECK(zero_is_absorbing(nullptr));
}

TEST_CASE("absorbing rules") {
  RandomStream rng({1, 0, Stream::Control});
  const std::vector<std::uint64_t> history{1};
  CHECK(apply_absorption(9, 1, rules::LowerBoundary{IntegerFunction::constant(5)}, history, rng) == 9);
  CHECK(apply_absorption(4, 1, rules::LowerBoundary{IntegerFunction::constant(5)}, history, rng) == 0);
  CHECK(apply_absorption(9, 2, rules::TruncationAsAbsorption{IntegerFunction::constant(5)}, history, rng) == 5);
  CHECK(apply_absorption(9, 2, rules::Disaster{DisasterSchedule::Constant{1.0}}, history, rng) == 0);
  CHECK(apply_absorption(9, 2, rules::Disaster{DisasterSchedule::Constant{0.0}}, history, rng) == 9);
  const rules::Custom bad{[](std::uint64_t l, std::size_t, History, RandomStream&) { return l + 1; }, "bad"};
  CHECK_THROWS_AS(apply_absorption(3, 1, bad, history, rng), InvalidRule);
}

TEST_CASE("disaster schedules") {
  const DisasterSchedule harmonic = DisasterSchedule::Harmonic{1.0, 2};
  CHECK(harmonic(1) == 0.0);
  CHECK(harmonic(4) == doctest::Approx(0.25));
  CHECK(harmonic.sum_diverges());
  const DisasterSchedule table = DisasterSchedule::Table{{0.5, 0.5}};
  CHECK(table(3) == 0.0);
  CHECK_FALSE(table.sum_diverges());
  CHECK(DisasterSchedule(DisasterSchedule::Constant{0.1}).sum_diverges());
  CHECK_FALSE(DisasterSchedule(DisasterSchedule::Constant{0.0}).sum_diverges());
}

TEST_CASE("series classification on symbolic forms") {
  const double q = 1.0 / 3.0;
  const auto c = zubkov_criterion(q, IntegerFunction::constant(3), 1000);
  CHECK(c.verdict == Verdict::Divergent);
  CHECK(c.exact);
  const auto l2 = zubkov_criterion(q, IntegerFunction::logarithmic(2.0, 3.0, Rounding::Ceil, 0.0, 1), 1000);
  CHECK(l2.verdict == Verdict::Convergent);
  CHECK(l2.fitted_decay_exponent.value() == doctest::Approx(2.0));
  // q^{log_3(n+1)} = 1/(n+1): the harmonic boundary diverges.
  CHECK(zubkov_criterion(q, IntegerFunction::logarithmic(1.0, 3.0), 1000).verdict == Verdict::Divergent);
  CHECK(zubkov_criterion(q, IntegerFunction::linear(0.1, 0.0), 1000).verdict == Verdict::Convergent);
  CHECK(zubkov_criterion(q, IntegerFunction::table({1, 2, 3}), 1000).verdict == Verdict::Divergent);
  CHECK_THROWS_AS(zubkov_criterion(1.0, IntegerFunction::constant(3), 1000), DomainError);
}

TEST_CASE("generic path labels itself heuristic") {
  const double q = 1.0 / 3.0;
  const auto fast = zubkov_criterion(
      q, IntegerFunction::custom([](std::uint64_t n) { return 3 * (std::uint64_t)std::ceil(std::log(n + 1.0)); }),
      10000);
  CHECK_FALSE(fast.exact);
  CHECK(fast.verdict == Verdict::Convergent);
  const auto flat = zubkov_criterion(q, IntegerFunction::custom([](std::uint64_t) { return 2; }), 10000);
  CHECK_FALSE(flat.exact);
  CHECK(flat.verdict == Verdict::Divergent);
  CHECK(flat.partial_sums.size() == 10000);
}

TEST_CASE("zubkov verdict is monotone in q") {
  const auto g = IntegerFunction::logarithmic(2.0, 3.0, Rounding::Ceil, 0.0, 1);
  bool seen_divergent = false;
  for (double q = 0.05; q < 1.0; q += 0.05) {
    const bool div = zubkov_criterion(q, g, 1000).verdict == Verdict::Divergent;
    if (seen_divergent) CHECK(div);
    seen_divergent = seen_divergent || div;
  }
  CHECK(seen_divergent);
}

TEST_CASE("expectation criterion") {
  const auto g = IntegerFunction::constant(3);
  CHECK(expectation_criterion(0.2, 1.0 / 3.0, g, 1000).verdict == Verdict::Divergent);
  CHECK_THROWS_AS(expectation_criterion(0.5, 1.0 / 3.0, g, 1000), DomainError);
}

TEST_CASE("truncated batch matches the exact chain") {
  BatchSpec spec{.law = kHalfQuarter};
  spec.policy = policies::Truncation{IntegerFunction::constant(3)};
  spec.horizon = 2;
  spec.trials = 20000;
  spec.master_seed = 6;
  const auto r = run_batch(spec);
  for (auto [n, p] : {std::pair<std::size_t, double>{1, 0.25}, {2, 0.296875}}) {
    const double sd = std::sqrt(p * (1 - p) / double(r.trials));
    CHECK(std::abs(double(r.per_generation_extinct_counts[n]) / double(r.trials) - p) <= 4 * sd);
  }
  for (std::size_t n = 1; n <= r.horizon; ++n) CHECK(r.tallies[n].sum <= 3.0L * r.tallies[n].alive);
  const auto env = envelope_check(r, IntegerFunction::constant(3));
  CHECK(env.conditional_violations.empty());
}

TEST_CASE("phi identity equals the plain process") {
  BatchSpec plain{.law = OffspringLaw::poisson(1.3)};
  plain.horizon = 40;
  plain.master_seed = 8;
  BatchSpec phi = plain;
  phi.policy = policies::Phi{IntegerFunction::identity()};
  for (std::size_t i = 0; i < 200; ++i) {
    Trajectory a, b;
    simulate_trajectory(plain, i, a);
    simulate_trajectory(phi, i, b);
    REQUIRE(a.counts == b.counts);
  }
}

TEST_CASE("phi with immigration keeps zero transient") {
  BatchSpec spec{.law = OffspringLaw::poisson(0.5)};
  spec.policy = policies::Phi{IntegerFunction::linear(1.0, 1.0)};
  spec.horizon = 50;
  spec.trials = 200;
  const auto r = run_batch(spec);
  CHECK_FALSE(r.zero_absorbing);
  CHECK(r.per_generation_extinct_counts[50] < r.trials);
}
