#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"
#include "mfnet/catalog.hpp"
#include "mfnet/model.hpp"

TEST_SUITE("model") {
  TEST_CASE("catalog models validate") {
    for (const auto& name : mfnet::catalog_names()) {
      INFO(name);
      const auto report = mfnet::validate(mfnet::catalog_model(name));
      CHECK_MESSAGE(report.ok(), report.summary());
    }
  }

  TEST_CASE("envelope violation names the offending tuple") {
    auto spec = testing::autonomous_three_state();
    spec.gamma.at(1, 0, 2, 1) = spec.gamma.envelope[1] + 1.0;
    const auto report = mfnet::validate(spec);
    REQUIRE(report.has("gamma_envelope"));
    CHECK(report.summary().find("(1,0,2,1)") != std::string::npos);
  }

  TEST_CASE("jump leaving the state space is a closure violation") {
    auto spec = testing::autonomous_three_state();
    spec.gamma.at(1, 2, 0, 0) = 0.1;  // 2 -> 3
    CHECK(mfnet::validate(spec).has("node_closure"));
    auto edges = testing::autonomous_three_state();
    edges.gamma_tilde.at(1, 1, 0, 0) = 0.1;  // 1 -> 2
    CHECK(mfnet::validate(edges).has("edge_closure"));
  }

  TEST_CASE("initial laws must be probability vectors") {
    auto spec = testing::autonomous_three_state();
    spec.mu0 = {0.5, 0.4, 0.0};
    CHECK(mfnet::validate(spec).has("mu0_simplex"));
    spec.mu0 = {1.0, 0.0, 0.0};
    spec.theta0 = {1.5, -0.5};
    CHECK(mfnet::validate(spec).has("theta0_simplex"));
  }

  TEST_CASE("marks must exclude zero and horizon must be positive") {
    auto spec = testing::autonomous_three_state();
    spec.spaces.marks = mfnet::IndexedStates({0, 1});
    CHECK(mfnet::validate(spec).has("zero_mark"));
    auto h = testing::autonomous_three_state();
    h.horizon = 0.0;
    CHECK(mfnet::validate(h).has("horizon"));
  }

  TEST_CASE("clt example with an even b1 fails the parity check") {
    auto spec = mfnet::clt_test_model();
    spec.clt->b1[0] = -spec.clt->b1[0] + 0.25;
    mfnet::apply_clt_kernel(spec);
    CHECK(mfnet::validate(spec).has("clt_parity"));
  }

  TEST_CASE("aggregate rate examples") {
    auto spec = testing::blank_three_state();
    for (std::size_t xt = 0; xt < 3; ++xt)
      for (std::size_t xi = 0; xi < 2; ++xi) spec.gamma.at(1, 0, xt, xi) = 0.7;
    std::vector<double> nu(6, 0.0);
    nu[3] = 0.25;
    nu[4] = 0.75;
    CHECK(mfnet::aggregate_rate(spec, 1, 0, nu) == doctest::Approx(0.7).epsilon(1e-15));

    // Point mass picks out one entry.
    spec.gamma.at(1, 0, 2, 1) = 3.0;
    std::vector<double> delta(6, 0.0);
    delta[2 * 2 + 1] = 1.0;
    CHECK(mfnet::aggregate_rate(spec, 1, 0, delta) == 3.0);

    // Uniform over four pairs with entries 1,2,3,4.
    auto two = testing::blank_three_state();
    two.gamma.at(1, 0, 0, 0) = 1;
    two.gamma.at(1, 0, 0, 1) = 2;
    two.gamma.at(1, 0, 1, 0) = 3;
    two.gamma.at(1, 0, 1, 1) = 4;
    CHECK(mfnet::aggregate_rate(two, 1, 0, std::vector<double>{0.25, 0.25, 0.25, 0.25, 0, 0}) ==
          doctest::Approx(2.5).epsilon(1e-15));
  }

  TEST_CASE("aggregate rate rejects non-probability input") {
    const auto spec = testing::autonomous_three_state();
    CHECK_THROWS_AS(mfnet::aggregate_rate(spec, 0, 1, std::vector<double>(5, 0.2)), std::invalid_argument);
    CHECK_THROWS_AS(mfnet::aggregate_rate(spec, 0, 1, std::vector<double>(6, 0.2)), std::invalid_argument);
    CHECK_THROWS_AS(mfnet::aggregate_rate(spec, 0, 1, std::vector<double>{1.5, -0.5, 0, 0, 0, 0}),
                    std::invalid_argument);
  }

  TEST_CASE("aggregate rate is linear in nu and bounded by the envelope") {
    const auto spec = mfnet::default_test_model();
    mfnet::CounterRng rng(3, 0);
    for (int trial = 0; trial < 200; ++trial) {
      const auto a = testing::random_simplex(rng, 6);
      const auto b = testing::random_simplex(rng, 6);
      const double w = rng.uniform();
      std::vector<double> mix(6);
      for (std::size_t k = 0; k < 6; ++k) mix[k] = w * a[k] + (1 - w) * b[k];
      for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 3; ++x) {
          const double lhs = mfnet::aggregate_rate(spec, y, x, mix);
          const double rhs = w * mfnet::aggregate_rate(spec, y, x, a) + (1 - w) * mfnet::aggregate_rate(spec, y, x, b);
          REQUIRE(std::abs(lhs - rhs) <= 1e-12);
          REQUIRE(lhs >= 0.0);
          REQUIRE(lhs <= spec.gamma.envelope[y] + 1e-12);
        }
    }
  }

  TEST_CASE("symmetric nu removes the odd parts of the separable kernel") {
    const auto spec = mfnet::clt_test_model();
    const auto& c = *spec.clt;
    const std::size_t nx = spec.num_node_states(), ne = spec.num_edge_states();
    mfnet::CounterRng rng(9, 1);
    for (int trial = 0; trial < 50; ++trial) {
      auto half = testing::random_simplex(rng, nx * ne);
      // Symmetrize under (x~, xi~) -> (-x~, -xi~); both spaces are listed in increasing order.
      std::vector<double> nu(nx * ne);
      for (std::size_t xt = 0; xt < nx; ++xt)
        for (std::size_t xi = 0; xi < ne; ++xi)
          nu[xt * ne + xi] = 0.5 * (half[xt * ne + xi] + half[(nx - 1 - xt) * ne + (ne - 1 - xi)]);
      for (std::size_t y = 0; y < spec.num_marks(); ++y)
        for (std::size_t x = 0; x < nx; ++x) {
          if (!spec.node_target(x, y)) continue;
          REQUIRE(mfnet::aggregate_rate(spec, y, x, nu) ==
                  doctest::Approx(c.c0[y] * c.b0[x] + c.c3[y]).epsilon(1e-12));
        }
    }
  }

  TEST_CASE("beta schedule") {
    const mfnet::BetaSchedule accel{2.0, 1.0};
    CHECK(accel(50) == 100.0);
    CHECK(mfnet::BetaSchedule::constant(3.0)(1000) == 3.0);
    CHECK(mfnet::BetaSchedule::constant(3.0).is_constant());
  }

  TEST_CASE("state spaces") {
    const mfnet::IndexedStates s({-1, 0, 1});
    CHECK(s.symmetric());
    CHECK(*s.index_of(1) == 2);
    CHECK_FALSE(s.index_of(5).has_value());
    CHECK(mfnet::IndexedStates({0, 0, 1}).has_duplicates());
  }
}
