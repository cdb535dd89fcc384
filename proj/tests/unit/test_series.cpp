#include <optional>
#include <vector>

#include "doctest.h"
#include "gwsim/errors.hpp"
#include "gwsim/series.hpp"

using namespace gwsim;

using Gen = std::optional<std::size_t>;

TEST_CASE("instant extinction") {
  const std::vector<Gen> gens(10, Gen{1});
  const std::vector<std::size_t> schedule{1, 2, 3};
  const auto e = estimate_conditional_series(gens, 3, schedule);
  CHECK(e.p_marginal == std::vector<double>{1, 1, 1});
  CHECK(e.p_conditional[0].value() == 1.0);
  CHECK_FALSE(e.p_conditional[1]);
  CHECK_FALSE(e.p_conditional[2]);
  CHECK(e.empty_conditioning());
  CHECK(chain_identity_holds(e));
}

TEST_CASE("hand-computed estimates") {
  const std::vector<Gen> gens{Gen{1}, Gen{2}, std::nullopt, Gen{4}, Gen{2}, std::nullopt, Gen{3}, Gen{9}};
  const std::vector<std::size_t> schedule{1, 2, 4};
  const auto e = estimate_conditional_series(gens, 10, schedule);
  CHECK(e.p_marginal[0] == doctest::Approx(1.0 / 8));
  CHECK(e.p_marginal[1] == doctest::Approx(3.0 / 8));
  CHECK(e.p_marginal[2] == doctest::Approx(5.0 / 8));
  CHECK(e.p_conditional[1].value() == doctest::Approx(2.0 / 7));
  CHECK(e.p_conditional[2].value() == doctest::Approx(2.0 / 5));
  CHECK(e.partial_sums[2] == doctest::Approx(1.0 / 8 + 2.0 / 7 + 2.0 / 5));
  CHECK(e.alive_before == std::vector<std::size_t>{8, 7, 5});
  CHECK(chain_identity_holds(e));
}

TEST_CASE("schedules") {
  CHECK(make_schedule(ScheduleFamily::Linear, 4, 100) == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK(make_schedule(ScheduleFamily::PowersOfTwo, 10, 20) == std::vector<std::size_t>{2, 4, 8, 16});
  CHECK(make_schedule(ScheduleFamily::Squares, 10, 30) == std::vector<std::size_t>{1, 4, 9, 16, 25});
  const std::vector<Gen> gens(4, std::nullopt);
  const std::vector<std::size_t> bad{2, 2};
  CHECK_THROWS_AS(estimate_conditional_series(gens, 10, bad), DomainError);
  const std::vector<std::size_t> late{5, 11};
  CHECK_THROWS_AS(estimate_conditional_series(gens, 10, late), DomainError);
}

TEST_CASE("schedule search") {
  const std::vector<Gen> survivors(5, std::nullopt);
  const auto tie = schedule_search(survivors, 100, 10);
  CHECK(tie.family == ScheduleFamily::Linear);
  CHECK(tie.partial_sum == 0.0);
  CHECK_THROWS_AS(schedule_search(survivors, 100, 1), DomainError);
}
