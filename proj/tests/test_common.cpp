#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "df/common.hpp"

using namespace df;

TEST_SUITE("common") {

TEST_CASE("rng streams are reproducible and seed sensitive") {
  Rng a(42), b(42), c(43);
  bool saw_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t va = a.raw();
    CHECK(va == b.raw());
    if (va != c.raw()) saw_diff = true;
  }
  CHECK(saw_diff);
}

TEST_CASE("uniform01 lands in [0,1) and uniform01_oc in (0,1]") {
  Rng rng(7);
  double lo = 1, hi = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  // the stream should actually cover the interval
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);

  Rng rng2(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng2.uniform01_oc();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("below is in range and roughly uniform") {
  Rng rng(11);
  std::vector<int> counts(5, 0);
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t v = rng.below(5);
    REQUIRE(v < 5);
    counts[static_cast<std::size_t>(v)]++;
  }
  for (int k = 0; k < 5; ++k) {
    // 5 sigma band around n/5
    CHECK(std::abs(counts[static_cast<std::size_t>(k)] - n / 5) < 450);
  }
  CHECK(rng.below(1) == 0);
}

TEST_CASE("bernoulli matches its probability") {
  Rng rng(3);
  int ones = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ones += rng.bernoulli(0.3) ? 1 : 0;
  CHECK(std::abs(ones / static_cast<double>(n) - 0.3) < 0.01);
  Rng r2(5);
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(r2.bernoulli(0.0));
    CHECK(r2.bernoulli(1.0));
  }
}

TEST_CASE("derive separates replicate streams") {
  const std::uint64_t s = 123;
  CHECK(Rng::derive(s, 0) != Rng::derive(s, 1));
  CHECK(Rng::derive(s, 1) != Rng::derive(s, 2));
  CHECK(Rng::derive(s, 1) == Rng::derive(s, 1));
  // nearby seeds with nearby streams still decorrelate
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (std::uint64_t r = 0; r < 10; ++r) seen.insert(Rng::derive(seed, r));
  CHECK(seen.size() == 100);
}

TEST_CASE("fmt_double round trips exactly") {
  const double cases[] = {0.0,
                          1.0,
                          -1.0,
                          0.1,
                          1.0 / 3.0,
                          2.0 / 3.0,
                          1e-300,
                          1e300,
                          5e-324,
                          0x1.fffffffffffffp+1023,
                          3.141592653589793,
                          0.30000000000000004};
  for (const double v : cases) {
    const std::string s = fmt_double(v);
    const double back = parse_double(s);
    CHECK(back == v);
  }
  // shortest form: common values print without noise digits
  CHECK(fmt_double(0.5) == "0.5");
  CHECK(fmt_double(1.0) == "1");
  CHECK(fmt_double(0.0) == "0");
}

TEST_CASE("parse_double rejects junk") {
  CHECK_THROWS_AS(parse_double(""), config_error);
  CHECK_THROWS_AS(parse_double("abc"), config_error);
  CHECK_THROWS_AS(parse_double("1.5x"), config_error);
  CHECK_THROWS_AS(parse_double("1.2.3"), config_error);
  CHECK_THROWS_AS(parse_double("1e"), config_error);
  CHECK(parse_double("-2.5e-3") == -2.5e-3);
}

TEST_CASE("fnv1a64 matches the reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("hex64 is fixed width lowercase") {
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
  CHECK(hex64(0xffffffffffffffffULL) == "ffffffffffffffff");
}

}  // TEST_SUITE
