#include <cmath>
#include <set>

#include "doctest.h"
#include "mfnet/philox.hpp"

using mfnet::Philox4x32;

TEST_SUITE("philox") {
  // Known-answer vectors of the Random123 reference implementation.
  TEST_CASE("known answers") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("generate is usable at compile time") {
    constexpr auto out = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
    static_assert(out[0] == 0x6627e8d5u);
  }

  TEST_CASE("uniform pair ranges") {
    const auto key = mfnet::philox_key(42);
    for (std::uint32_t k = 0; k < 10000; ++k) {
      const auto u = mfnet::uniform_pair({k, 1, 2, 3}, key);
      REQUIRE(u.open > 0.0);
      REQUIRE(u.open <= 1.0);
      REQUIRE(u.closed >= 0.0);
      REQUIRE(u.closed < 1.0);
    }
  }

  TEST_CASE("derived seeds are distinct per tag and per seed") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 20; ++s)
      for (std::uint64_t r = 0; r < 500; ++r) seen.insert(mfnet::derive_seed(s, r));
    CHECK(seen.size() == 20 * 500);
    CHECK(mfnet::derive_seed(7, 3) == mfnet::derive_seed(7, 3));
  }

  TEST_CASE("counter rng moments") {
    mfnet::CounterRng rng(11, 5);
    const int n = 200000;
    double s = 0, s2 = 0, z = 0, z2 = 0, e = 0;
    for (int k = 0; k < n; ++k) {
      const double u = rng.uniform();
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
      s += u;
      s2 += u * u;
      const double g = rng.normal();
      z += g;
      z2 += g * g;
      e += rng.exponential(2.0);
    }
    CHECK(s / n == doctest::Approx(0.5).epsilon(0.005));
    CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(1.0 / 12).epsilon(0.01));
    CHECK(std::abs(z / n) < 4.0 / std::sqrt(n));
    CHECK(z2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(e / n == doctest::Approx(0.5).epsilon(0.01));
  }

  TEST_CASE("streams with different tags differ") {
    mfnet::CounterRng a(1, 0), b(1, 1), c(1, 0);
    int same = 0;
    for (int k = 0; k < 100; ++k) {
      const double ua = a.uniform(), ub = b.uniform();
      CHECK(ua == c.uniform());
      same += ua == ub;
    }
    CHECK(same == 0);
  }
}
