#include <cmath>
#include <vector>

#include "doctest.h"
#include "gwsim/errors.hpp"
#include "gwsim/law.hpp"
#include "gwsim/random.hpp"

using namespace gwsim;

TEST_CASE("pgf of an explicit law") {
  const auto law = OffspringLaw::explicit_pmf({{0, 0.25}, {2, 0.75}});
  CHECK(law.pgf(1.0) == doctest::Approx(1.0));
  CHECK(law.pgf(0.0) == doctest::Approx(0.25));
  CHECK(law.pgf(0.5) == doctest::Approx(0.25 + 0.75 * 0.25));
  CHECK(law.mean() == doctest::Approx(1.5));
  CHECK(law.variance() == doctest::Approx(0.75 * 4 - 2.25));
  CHECK(law.finite_support());
  CHECK(law.max_offspring() == 2);
  CHECK_THROWS_AS(law.pgf(1.5), DomainError);
  CHECK_THROWS_AS(law.pgf(-0.1), DomainError);
}

TEST_CASE("pmf must sum to one") {
  CHECK_THROWS_AS(OffspringLaw::explicit_pmf({{0, 0.3}, {1, 0.3}}), DomainError);
  CHECK_THROWS_AS(OffspringLaw::explicit_pmf({{0, -0.1}, {1, 1.1}}), DomainError);
  CHECK_THROWS_AS(OffspringLaw::poisson(-1.0), DomainError);
  CHECK_THROWS_AS(OffspringLaw::geometric(1.0), DomainError);
  CHECK_THROWS_AS(OffspringLaw::binomial(3, 1.5), DomainError);
}

TEST_CASE("closed-form pgfs") {
  CHECK(OffspringLaw::poisson(2.0).pgf(0.3) == doctest::Approx(std::exp(2.0 * (0.3 - 1.0))));
  CHECK(OffspringLaw::geometric(0.6).pgf(0.3) == doctest::Approx(0.4 / (1 - 0.18)));
  CHECK(OffspringLaw::binomial(4, 0.3).pgf(0.5) == doctest::Approx(std::pow(0.7 + 0.15, 4)));
  CHECK(OffspringLaw::geometric(0.6).mean() == doctest::Approx(1.5));
}

TEST_CASE("extinction probability oracles") {
  CHECK(extinction_probability(OffspringLaw::explicit_pmf({{0, 0.25}, {2, 0.75}})).q ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(extinction_probability(OffspringLaw::geometric(0.6)).q == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  const auto pois = extinction_probability(OffspringLaw::poisson(2.0));
  CHECK(std::abs(pois.q - 0.2031878699799799) < 1e-12);
  CHECK(pois.residual < 1e-12);
}

TEST_CASE("extinction probability edge cases") {
  SUBCASE("subcritical") { CHECK(extinction_probability(OffspringLaw::poisson(0.8)).q == 1.0); }
  SUBCASE("critical is flagged") {
    const auto r = extinction_probability(OffspringLaw::explicit_pmf({{0, 0.5}, {2, 0.5}}));
    CHECK(r.critical);
    CHECK(r.q == 1.0);
  }
  SUBCASE("no childless parents") {
    CHECK(extinction_probability(OffspringLaw::explicit_pmf({{1, 0.5}, {2, 0.5}})).q == 0.0);
    CHECK(extinction_probability(OffspringLaw::explicit_pmf({{1, 1.0}})).q == 0.0);
  }
  SUBCASE("fixed point property") {
    for (double lambda : {1.1, 1.5, 3.0, 7.0}) {
      const auto law = OffspringLaw::poisson(lambda);
      const double q = extinction_probability(law).q;
      CHECK(std::abs(law.pgf(q) - q) < 1e-12);
      CHECK(q < 1.0);
    }
  }
}

TEST_CASE("alias table reproduces its pmf") {
  const std::vector<double> p{0.1, 0.0, 0.45, 0.25, 0.2};
  AliasTable table(p);
  RandomStream rng({5, 0, Stream::User});
  std::vector<int> hits(p.size(), 0);
  const int n = 400000;
  for (int i = 0; i < n; ++i) ++hits[table.sample(rng.uniform())];
  CHECK(hits[1] == 0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double sd = std::sqrt(p[k] * (1 - p[k]) / n);
    CHECK(std::abs(hits[k] / double(n) - p[k]) <= 5 * sd + 1e-12);
  }
}
