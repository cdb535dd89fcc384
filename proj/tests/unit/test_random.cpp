#include <set>

#include "doctest.h"
#include "gwsim/random.hpp"

using namespace gwsim;

TEST_CASE("identical keys reproduce identical sequences") {
  RandomStream a({42, 7, Stream::Reproduction});
  RandomStream b({42, 7, Stream::Reproduction});
  for (int i = 0; i < 1000; ++i) CHECK(a() == b());
}

TEST_CASE("streams of one trial are distinct") {
  std::set<std::uint64_t> first;
  for (auto s : {Stream::Reproduction, Stream::Control, Stream::Sex, Stream::Claims, Stream::User}) {
    RandomStream r({1, 0, s});
    first.insert(r());
  }
  CHECK(first.size() == 5);
  RandomStream t0({1, 0, Stream::Reproduction});
  RandomStream t1({1, 1, Stream::Reproduction});
  CHECK(t0() != t1());
}

TEST_CASE("substreams ignore draws already consumed") {
  RandomStream a({9, 3, Stream::Control});
  RandomStream b({9, 3, Stream::Control});
  for (int i = 0; i < 17; ++i) b();
  auto sa = a.substream(5);
  auto sb = b.substream(5);
  CHECK(sa.identity() == sb.identity());
  CHECK(sa() == sb());
  CHECK(a.substream(5).identity() != a.substream(6).identity());
}

TEST_CASE("uniform draws lie in [0, 1) and average one half") {
  RandomStream r({3, 0, Stream::User});
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
}
