#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/distributions/normal.hpp>

#include "doctest.h"
#include "helpers.hpp"
#include "mfnet/metrics.hpp"
#include "mfnet/path.hpp"

using mfnet::GroundMetric;

namespace {

// Maximize sum f (p - q) over the Lipschitz polytope of min(d, 2) by enumerating
// every spanning tree of tight constraints (Pruefer codes) and every orientation.
double dbl_by_vertices(const std::vector<double>& p, const std::vector<double>& q, const GroundMetric& d) {
  const std::size_t k = d.size();
  auto dist = [&](std::size_t a, std::size_t b) { return std::min(d(a, b), 2.0); };
  double best = 0.0;
  std::vector<std::size_t> code(k - 2, 0);
  for (;;) {
    // Decode the Pruefer sequence into k-1 edges.
    std::vector<std::size_t> degree(k, 1);
    for (auto c : code) ++degree[c];
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (auto c : code)
      for (std::size_t leaf = 0; leaf < k; ++leaf)
        if (degree[leaf] == 1) {
          edges.emplace_back(leaf, c);
          --degree[leaf];
          --degree[c];
          break;
        }
    std::vector<std::size_t> rest;
    for (std::size_t v = 0; v < k; ++v)
      if (degree[v] == 1) rest.push_back(v);
    edges.emplace_back(rest[0], rest[1]);

    for (std::uint32_t signs = 0; signs < (1u << (k - 1)); ++signs) {
      std::vector<double> f(k, 0.0);
      std::vector<bool> done(k, false);
      done[0] = true;
      for (std::size_t pass = 0; pass < k; ++pass)
        for (std::size_t e = 0; e < edges.size(); ++e) {
          const auto [a, b] = edges[e];
          const double step = (signs >> e & 1u ? 1.0 : -1.0) * dist(a, b);
          if (done[a] && !done[b]) f[b] = f[a] + step, done[b] = true;
          else if (done[b] && !done[a]) f[a] = f[b] - step, done[a] = true;
        }
      bool feasible = true;
      for (std::size_t a = 0; a < k && feasible; ++a)
        for (std::size_t b = 0; b < k; ++b)
          if (f[a] - f[b] > dist(a, b) + 1e-12) {
            feasible = false;
            break;
          }
      if (!feasible) continue;
      double value = 0.0;
      for (std::size_t a = 0; a < k; ++a) value += f[a] * (p[a] - q[a]);
      best = std::max(best, value);
    }
    std::size_t pos = 0;
    while (pos < code.size() && ++code[pos] == k) code[pos++] = 0;
    if (pos == code.size()) break;
  }
  return best;
}

GroundMetric random_metric(mfnet::CounterRng& rng, std::size_t k) {
  std::vector<std::vector<int>> points(k, std::vector<int>(2));
  for (std::size_t a = 0; a < k; ++a) points[a] = {static_cast<int>(a), static_cast<int>(rng.uniform() * 4)};
  // l1 on a small lattice, then scale so that some distances exceed 2.
  auto base = GroundMetric::l1(points);
  std::vector<double> d(k * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) d[a * k + b] = 0.6 * base(a, b);
  return GroundMetric(k, d);
}

mfnet::Path random_path(mfnet::CounterRng& rng) {
  mfnet::Path p;
  p.initial = static_cast<int>(rng.uniform() * 7) - 3;
  for (int slot = 1; slot < 64; ++slot)
    if (rng.uniform() < 0.15) p.jumps.emplace_back(slot / 64.0, static_cast<int>(rng.uniform() * 7) - 3);
  return p;
}

std::vector<double> normals(mfnet::CounterRng& rng, std::size_t n, double sd = 1.0) {
  std::vector<double> out(n);
  for (double& v : out) v = sd * rng.normal();
  return out;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("dbl examples") {
    const auto line = GroundMetric::line({0, 1, 2, 5});
    const std::vector<double> a{1, 0, 0, 0}, b{0, 1, 0, 0}, c{0, 0, 0, 1}, u{0.25, 0.25, 0.25, 0.25};
    CHECK(mfnet::dbl_distance(u, u, line) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mfnet::dbl_distance(a, b, line) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(mfnet::dbl_distance(a, c, line) == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("dbl agrees with vertex enumeration") {
    mfnet::CounterRng rng(2, 0);
    for (int trial = 0; trial < 20; ++trial) {
      const auto d = random_metric(rng, 6);
      const auto p = testing::random_simplex(rng, 6);
      const auto q = testing::random_simplex(rng, 6);
      CHECK(mfnet::dbl_distance(p, q, d) == doctest::Approx(dbl_by_vertices(p, q, d)).epsilon(1e-8));
    }
  }

  TEST_CASE("dbl is a metric bounded by total variation and Wasserstein") {
    mfnet::CounterRng rng(3, 0);
    const std::vector<int> values{0, 1, 2, 3, 4};
    const auto line = GroundMetric::line(values);
    for (int trial = 0; trial < 50; ++trial) {
      const auto p = testing::random_simplex(rng, 5);
      const auto q = testing::random_simplex(rng, 5);
      const auto r = testing::random_simplex(rng, 5);
      const double pq = mfnet::dbl_distance(p, q, line);
      CHECK(pq == doctest::Approx(mfnet::dbl_distance(q, p, line)).epsilon(1e-9));
      CHECK(pq <= mfnet::dbl_distance(p, r, line) + mfnet::dbl_distance(r, q, line) + 1e-9);
      double l1 = 0.0, w1 = 0.0, cdf = 0.0;
      for (std::size_t k = 0; k < 5; ++k) {
        l1 += std::abs(p[k] - q[k]);
        cdf += p[k] - q[k];
        if (k + 1 < 5) w1 += std::abs(cdf);
      }
      CHECK(pq <= l1 + 1e-9);
      CHECK(pq <= w1 + 1e-9);
    }
  }

  TEST_CASE("invalid ground metrics are rejected") {
    const GroundMetric bad(3, {0, 1, 5, 1, 0, 1, 5, 1, 0});
    CHECK(bad.violation().has_value());
    const std::vector<double> p{1, 0, 0}, q{0, 0, 1};
    CHECK_THROWS_AS(mfnet::dbl_distance(p, q, bad), std::invalid_argument);
    CHECK_THROWS_AS(GroundMetric(2, {0, 1, 1}), std::invalid_argument);
    CHECK_FALSE(GroundMetric::product_l1({-1, 0, 1}, {0, 1}).violation().has_value());
  }

  TEST_CASE("sup path distance examples") {
    mfnet::Path zero;
    mfnet::Path step;
    step.jumps = {{0.5, 3}};
    CHECK(mfnet::sup_path_distance(zero, zero, 1.0) == 0.0);
    CHECK(mfnet::sup_path_distance(zero, step, 1.0) == 3.0);
    CHECK(mfnet::sup_path_distance(zero, step, 0.4) == 0.0);
  }

  TEST_CASE("sup path distance against a dense grid") {
    mfnet::CounterRng rng(4, 0);
    for (int trial = 0; trial < 50; ++trial) {
      const auto a = random_path(rng), b = random_path(rng), c = random_path(rng);
      double grid = 0.0;
      for (int k = 0; k <= 100000; ++k) {
        const double t = k / 100000.0;
        grid = std::max(grid, static_cast<double>(std::abs(a.at(t) - b.at(t))));
      }
      const double exact = mfnet::sup_path_distance(a, b, 1.0);
      CHECK(exact == grid);
      CHECK(exact <= mfnet::sup_path_distance(a, c, 1.0) + mfnet::sup_path_distance(c, b, 1.0));
    }
  }

  TEST_CASE("fit rate recovers exact power laws") {
    const std::vector<double> xs{50, 100, 200, 400, 800};
    std::vector<double> e(xs.size()), flat(xs.size(), 0.3);
    for (std::size_t k = 0; k < xs.size(); ++k) e[k] = 2.0 / std::sqrt(xs[k]);
    const auto fit = mfnet::fit_rate(xs, e);
    CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(std::exp(fit.intercept) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(mfnet::fit_rate(xs, flat).slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  }

  TEST_CASE("fit rate under 5 percent noise") {
    mfnet::CounterRng rng(5, 0);
    const std::vector<double> xs{50, 100, 200, 400, 800, 1600};
    int inside = 0, covered = 0;
    const int reps = 1000;
    for (int r = 0; r < reps; ++r) {
      std::vector<double> e(xs.size());
      for (std::size_t k = 0; k < xs.size(); ++k) e[k] = std::exp(0.05 * rng.normal()) / std::sqrt(xs[k]);
      const auto fit = mfnet::fit_rate(xs, e);
      inside += fit.slope >= -0.65 && fit.slope <= -0.35;
      covered += fit.ci_low <= -0.5 && -0.5 <= fit.ci_high;
    }
    CHECK(inside >= 950);
    CHECK(covered >= 920);
    CHECK(covered <= 980);
  }

  TEST_CASE("fit rate input errors") {
    const std::vector<double> three{1, 2, 3};
    CHECK_THROWS_AS(mfnet::fit_rate(three, three), std::invalid_argument);
    const std::vector<double> xs{1, 2, 3, 4}, bad{1, 0, 1, 1}, same{2, 2, 2, 2};
    CHECK_THROWS_AS(mfnet::fit_rate(xs, bad), std::invalid_argument);
    CHECK_THROWS_AS(mfnet::fit_rate(same, xs), std::invalid_argument);
  }

  TEST_CASE("kolmogorov survival quantiles") {
    CHECK(mfnet::kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(mfnet::kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(2e-3));
    CHECK(mfnet::kolmogorov_survival(0.0) == 1.0);
  }

  TEST_CASE("ks p-values are uniform under the null") {
    mfnet::CounterRng rng(6, 0);
    const boost::math::normal standard;
    std::vector<double> z;
    int rejected = 0;
    for (int r = 0; r < 2000; ++r) {
      const auto res = mfnet::ks_normal_test(normals(rng, 200), 0.0, 1.0);
      rejected += res.p_value < 0.05;
      z.push_back(boost::math::quantile(standard, std::clamp(res.p_value, 1e-12, 1 - 1e-12)));
    }
    CHECK(rejected >= 60);
    CHECK(rejected <= 140);
    CHECK(mfnet::ks_normal_test(z, 0.0, 1.0).p_value >= 0.001);
  }

  TEST_CASE("ks rejects obvious misfits") {
    mfnet::CounterRng rng(7, 0);
    CHECK(mfnet::ks_normal_test(std::vector<double>(100, 0.5), 0.0, 1.0).p_value < 1e-6);
    CHECK(mfnet::ks_normal_test(normals(rng, 200), 10.0, 1.0).p_value < 1e-6);
    CHECK_THROWS_AS(mfnet::ks_normal_test(normals(rng, 200), 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mfnet::ks_normal_test(normals(rng, 49), 0.0, 1.0), std::invalid_argument);
  }

  TEST_CASE("excess kurtosis references") {
    mfnet::CounterRng rng(8, 0);
    const std::size_t n = 100000;
    const auto normal = mfnet::excess_kurtosis(normals(rng, n));
    CHECK(std::abs(normal.value) <= 3 * normal.se);
    std::vector<double> mix(n), uni(n);
    for (std::size_t k = 0; k < n; ++k) {
      mix[k] = (rng.uniform() < 0.5 ? 1.0 : 3.0) * rng.normal();
      uni[k] = rng.uniform();
    }
    const auto m = mfnet::excess_kurtosis(mix);
    CHECK(std::abs(m.value - 1.92) <= 3 * m.se);
    const auto u = mfnet::excess_kurtosis(uni);
    CHECK(std::abs(u.value + 1.2) <= 3 * u.se);
    CHECK_THROWS_AS(mfnet::excess_kurtosis(std::vector<double>(99, 1.0)), std::invalid_argument);
  }

  TEST_CASE("mean and variance with standard errors") {
    const std::vector<double> s{1, 2, 3, 4};
    CHECK(mfnet::mean_se(s).value == 2.5);
    CHECK(mfnet::mean_se(s).se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(mfnet::variance_se(s).value == doctest::Approx(5.0 / 3.0));
    mfnet::CounterRng rng(9, 0);
    const auto v = mfnet::variance_se(normals(rng, 50000, 2.0));
    CHECK(std::abs(v.value - 4.0) <= 3 * v.se);
    CHECK(v.se == doctest::Approx(std::sqrt(2.0 * 16 / 50000)).epsilon(0.05));
  }

  TEST_CASE("sample index inverts the cdf") {
    const std::vector<double> w{1, 0, 3};
    CHECK(mfnet::sample_index(w, 0.1) == 0);
    CHECK(mfnet::sample_index(w, 0.24) == 0);
    CHECK(mfnet::sample_index(w, 0.26) == 2);
    CHECK(mfnet::sample_index(w, 1.0) == 2);
  }
}
