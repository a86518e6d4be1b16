#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "semiscore/rng.hpp"

using namespace semiscore;

TEST_SUITE("rng") {

// Reference vectors for the 10-round generator with the standard key schedule.
TEST_CASE("known answer, zero counter and key") {
  const auto out = philox4x32({0u, 0u, 0u, 0u}, 0u, 0u);
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);
}

TEST_CASE("known answer, all-ones counter and key") {
  const std::uint32_t f = 0xffffffffu;
  const auto out = philox4x32({f, f, f, f}, f, f);
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);
}

TEST_CASE("uniforms stay inside the open interval") {
  CounterRng rng(123, rng_stream(RngDomain::misc, 5));
  for (std::uint64_t c = 0; c < 5000; ++c) {
    const double u = rng.uniform(c);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("draws are pure functions of (seed, stream, counter)") {
  CounterRng a(77, rng_stream(RngDomain::target, 3));
  CounterRng b(77, rng_stream(RngDomain::target, 3));
  CounterRng c(77, rng_stream(RngDomain::target, 4));
  CounterRng d(78, rng_stream(RngDomain::target, 3));
  CHECK(a.uniform(9) == b.uniform(9));
  CHECK(a.normal(11) == b.normal(11));
  CHECK(a.uniform(9) != c.uniform(9));
  CHECK(a.uniform(9) != d.uniform(9));
}

TEST_CASE("normal pairs have the right first moments") {
  CounterRng rng(2024, rng_stream(RngDomain::misc, 0));
  const int n = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n / 2; ++i) {
    const auto z = rng.normal_pair(i);
    s1 += z[0] + z[1];
    s2 += z[0] * z[0] + z[1] * z[1];
  }
  CHECK(std::abs(s1 / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.03);
}

TEST_CASE("fill_normal consumes counters in pairs") {
  CounterRng rng(9, rng_stream(RngDomain::fit, 1));
  std::vector<double> out(5);
  const std::uint64_t next = rng.fill_normal(100, out.data(), 5);
  CHECK(next == 103);  // two pair blocks plus one single
  const auto p0 = rng.normal_pair(100);
  const auto p1 = rng.normal_pair(101);
  CHECK(out[0] == p0[0]);
  CHECK(out[1] == p0[1]);
  CHECK(out[2] == p1[0]);
  CHECK(out[3] == p1[1]);
  CHECK(out[4] == rng.normal(102));

  std::vector<double> even(4);
  CHECK(rng.fill_normal(7, even.data(), 4) == 9);
}

TEST_CASE("domain tags keep streams disjoint") {
  CHECK(rng_stream(RngDomain::target, 0) != rng_stream(RngDomain::trajectory, 0));
  CHECK(rng_stream(RngDomain::target, 1) == (std::uint64_t{1} << 56 | 1));
}

}  // TEST_SUITE
