#include "doctest.h"

#include <cmath>
#include <vector>

#include "macsim/rng.hpp"

using namespace macsim;

TEST_CASE("streams replay exactly for the same (seed, node, purpose)") {
  RngStream a(42, 3, "backoff");
  RngStream b(42, 3, "backoff");
  for (int i = 0; i < 1000; ++i) CHECK(a.draw(1 << 20) == b.draw(1 << 20));
}

TEST_CASE("different node or purpose gives a different sequence") {
  RngStream base(42, 3, "backoff");
  RngStream other_node(42, 4, "backoff");
  RngStream other_purpose(42, 3, "traffic");
  RngStream other_seed(43, 3, "backoff");
  int same_node = 0, same_purpose = 0, same_seed = 0;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t v = base.draw(UINT64_MAX);
    if (v == other_node.draw(UINT64_MAX)) same_node++;
    if (v == other_purpose.draw(UINT64_MAX)) same_purpose++;
    if (v == other_seed.draw(UINT64_MAX)) same_seed++;
  }
  CHECK(same_node == 0);
  CHECK(same_purpose == 0);
  CHECK(same_seed == 0);
}

TEST_CASE("a stream's draws are independent of other streams' usage") {
  // Interleaving draws on stream X must not change what stream Y produces.
  RngSource src1(7), src2(7);
  std::vector<std::uint64_t> quiet, noisy;
  for (int i = 0; i < 100; ++i) quiet.push_back(src1.stream(0, "a").draw(1000));
  for (int i = 0; i < 100; ++i) {
    src2.stream(1, "b").draw(17);  // unrelated traffic
    src2.stream(0, "other").draw(17);
    noisy.push_back(src2.stream(0, "a").draw(1000));
  }
  CHECK(quiet == noisy);
}

TEST_CASE("draw covers [0, n) and rejects n = 0") {
  RngStream s(1, 0, "t");
  CHECK_THROWS_AS(s.draw(0), std::invalid_argument);
  CHECK(s.draw(1) == 0);
  std::vector<int> seen(8, 0);
  for (int i = 0; i < 4000; ++i) {
    const std::uint64_t v = s.draw(8);
    REQUIRE(v < 8);
    seen[v]++;
  }
  for (int c : seen) CHECK(c > 300);  // every bucket hit, roughly uniform
}

TEST_CASE("uniform01 stays in [0, 1) with mean near one half") {
  RngStream s(5, 2, "u");
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = s.uniform01();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("exponential mean matches the requested mean within 5%") {
  RngStream s(11, 6, "traffic");
  const Tick mean = sec(2);
  double sum = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const Tick v = s.exponential(mean);
    REQUIRE(v >= 1);
    sum += static_cast<double>(v);
  }
  CHECK(sum / n == doctest::Approx(static_cast<double>(mean)).epsilon(0.05));
}

TEST_CASE("exponential never returns zero even for tiny means") {
  RngStream s(3, 1, "t");
  for (int i = 0; i < 1000; ++i) CHECK(s.exponential(1) >= 1);
}

TEST_CASE("symmetric_unit spans [-1, 1] with mean near zero") {
  RngStream s(9, 0, "drift");
  double sum = 0, lo = 1, hi = -1;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double v = s.symmetric_unit();
    REQUIRE(v >= -1.0);
    REQUIRE(v <= 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(lo < -0.9);
  CHECK(hi > 0.9);
}

TEST_CASE("RngSource hands back the same stream object per key") {
  RngSource src(123);
  RngStream& a = src.stream(2, "x");
  const std::uint64_t first = a.draw(1000000);
  // Same key: continues the sequence rather than restarting it.
  RngStream fresh(123, 2, "x");
  CHECK(first == fresh.draw(1000000));
  CHECK(src.stream(2, "x").draw(1000000) == fresh.draw(1000000));
  CHECK(src.master_seed() == 123);
}
