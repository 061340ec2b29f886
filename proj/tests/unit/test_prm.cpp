#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "mfnet/catalog.hpp"
#include "mfnet/prm.hpp"

using mfnet::PrmStream;
using mfnet::StreamId;

TEST_SUITE("prm") {
  TEST_CASE("empty window and zero intensity") {
    const PrmStream s(StreamId::node(1), 5, 2.0, {1.0}, {1.0});
    CHECK(s.events_between(0.7, 0.7).empty());
    const PrmStream quiet(StreamId::node(1), 5, 2.0, {1.0, 1.0}, {0.0, 0.0});
    CHECK(quiet.events().empty());
  }

  TEST_CASE("window outside the horizon throws") {
    const PrmStream s(StreamId::node(1), 5, 2.0, {1.0}, {1.0});
    CHECK_THROWS_AS(s.events_between(-0.1, 1.0), std::out_of_range);
    CHECK_THROWS_AS(s.events_between(1.0, 2.5), std::out_of_range);
    CHECK_THROWS_AS(s.events_between(1.5, 1.0), std::out_of_range);
  }

  TEST_CASE("mean candidate count is rho * ceiling * T") {
    const int streams = 100000;
    double total = 0.0;
    for (int i = 1; i <= streams; ++i)
      total += static_cast<double>(PrmStream(StreamId::node(i), 17, 2.0, {1.0}, {1.0}).events().size());
    CHECK(total / streams == doctest::Approx(2.0).epsilon(0.015));
  }

  TEST_CASE("atoms are sorted, inside the box and windows partition them") {
    const PrmStream s(StreamId::edge(3, 4), 2, 5.0, {0.5, 2.0}, {3.0, 0.25});
    const auto& ev = s.events();
    REQUIRE(ev.size() > 10);
    for (std::size_t k = 0; k < ev.size(); ++k) {
      CHECK(ev[k].s > 0.0);
      CHECK(ev[k].s <= 5.0);
      CHECK(ev[k].z >= 0.0);
      CHECK(ev[k].z < s.ceiling()[ev[k].mark]);
      if (k) CHECK(ev[k - 1].s <= ev[k].s);
    }
    auto a = s.events_between(0.0, 1.3);
    const auto b = s.events_between(1.3, 5.0);
    a.insert(a.end(), b.begin(), b.end());
    CHECK(a == ev);
  }

  TEST_CASE("thinning acceptance fraction") {
    const PrmStream s(StreamId::node(9), 4, 20000.0, {1.0}, {2.0});
    std::size_t all = 0, half = 0, none = 0;
    for (const auto& e : s.events()) {
      all += mfnet::thin(e, 2.0, 2.0);
      half += mfnet::thin(e, 1.0, 2.0);
      none += mfnet::thin(e, 0.0, 2.0);
    }
    CHECK(all == s.events().size());
    CHECK(none == 0);
    CHECK(static_cast<double>(half) / static_cast<double>(all) == doctest::Approx(0.5).epsilon(0.02));
  }

  TEST_CASE("thinning outside the ceiling throws") {
    const mfnet::PrmEvent e{0.5, 0, 0.1};
    CHECK_THROWS_AS(mfnet::thin(e, 1.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(mfnet::thin(e, -0.1, 1.0), std::domain_error);
  }

  TEST_CASE("thinned arrivals form a Poisson process of the thinned rate") {
    // Chi-square on ten equiprobable bins of the inter-arrival times.
    const double rate = 0.6;
    const PrmStream s(StreamId::node(2), 8, 40000.0, {1.0}, {1.5});
    std::vector<double> gaps;
    double last = 0.0;
    for (const auto& e : s.events())
      if (mfnet::thin(e, rate, 1.5)) {
        gaps.push_back(e.s - last);
        last = e.s;
      }
    REQUIRE(gaps.size() > 10000);
    CHECK(static_cast<double>(gaps.size()) / 40000.0 == doctest::Approx(rate).epsilon(0.03));
    std::vector<double> bins(10, 0.0);
    for (double g : gaps) {
      const double u = 1.0 - std::exp(-rate * g);
      bins[std::min<std::size_t>(9, static_cast<std::size_t>(u * 10))] += 1;
    }
    const double expected = static_cast<double>(gaps.size()) / 10;
    double chi2 = 0.0;
    for (double b : bins) chi2 += (b - expected) * (b - expected) / expected;
    CHECK(chi2 < boost::math::quantile(boost::math::chi_squared(9), 0.999));
  }

  TEST_CASE("streams are reproducible and distinct") {
    const auto spec = mfnet::default_test_model();
    const auto fam = mfnet::make_stream_family(spec, 21, 50.0);
    CHECK(fam.node(3).events() == fam.node(3).events());
    CHECK(fam.node(3).events() != fam.node(4).events());
    CHECK(fam.edge(1, 2).events() != fam.edge(2, 1).events());
    const auto other = mfnet::make_stream_family(spec, 22, 50.0);
    CHECK(fam.node(3).events() != other.node(3).events());
  }

  TEST_CASE("mark processes regenerate the stream atoms") {
    const auto spec = mfnet::default_test_model();
    const auto fam = mfnet::make_stream_family(spec, 3, 1.0);
    const auto ev = fam.node(5).events();
    std::vector<mfnet::PrmEvent> rebuilt;
    for (std::uint32_t y = 0; y < spec.num_marks(); ++y) {
      const auto proc = fam.node_process(5, y);
      double s = proc.first_time();
      for (std::uint32_t k = 0; s <= spec.horizon; ++k) {
        const auto st = proc.step(k, s);
        rebuilt.push_back({s, y, st.z});
        s = st.next_s;
      }
    }
    std::sort(rebuilt.begin(), rebuilt.end(), [](const auto& a, const auto& b) {
      return std::tie(a.s, a.mark, a.z) < std::tie(b.s, b.mark, b.z);
    });
    CHECK(rebuilt == ev);
  }

  TEST_CASE("accepted sets grow with the thinning rate") {
    const PrmStream s(StreamId::edge(1, 1), 6, 10.0, {1.0}, {8.0});
    for (const auto& e : s.events())
      for (double lo : {0.5, 1.0, 2.0})
        if (mfnet::thin(e, lo, 8.0)) REQUIRE(mfnet::thin(e, 2 * lo, 8.0));
  }

  TEST_CASE("expected candidates") {
    auto spec = mfnet::default_test_model();
    const auto fam = mfnet::make_stream_family(spec, 1, 10.0);
    double node = 0.0, edge = 0.0;
    for (std::size_t y = 0; y < spec.num_marks(); ++y) {
      node += spec.rho[y] * fam.node_ceiling[y] * spec.horizon;
      edge += spec.rho[y] * fam.edge_ceiling[y] * spec.horizon;
    }
    CHECK(fam.expected_candidates(30) == doctest::Approx(30 * node + 900 * edge));
  }
}
