#include "mfnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace mfnet {

GroundMetric::GroundMetric(std::size_t size, std::vector<double> d) : size_(size), d_(std::move(d)) {
  if (d_.size() != size_ * size_) throw std::invalid_argument("GroundMetric: need size*size entries");
}

GroundMetric GroundMetric::l1(const std::vector<std::vector<int>>& points) {
  const std::size_t m = points.size();
  std::vector<double> d(m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      if (points[a].size() != points[b].size()) throw std::invalid_argument("GroundMetric::l1: ragged points");
      double s = 0.0;
      for (std::size_t k = 0; k < points[a].size(); ++k) s += std::abs(points[a][k] - points[b][k]);
      d[a * m + b] = s;
    }
  return {m, std::move(d)};
}

GroundMetric GroundMetric::line(const std::vector<int>& values) {
  std::vector<std::vector<int>> pts;
  for (int v : values) pts.push_back({v});
  return l1(pts);
}

GroundMetric GroundMetric::product_l1(const std::vector<int>& first, const std::vector<int>& second) {
  std::vector<std::vector<int>> pts;
  for (int a : first)
    for (int b : second) pts.push_back({a, b});
  return l1(pts);
}

std::optional<std::string> GroundMetric::violation(double tol) const {
  const std::size_t m = size_;
  std::ostringstream os;
  for (std::size_t a = 0; a < m; ++a) {
    if (std::abs((*this)(a, a)) > tol) {
      os << "d(" << a << ',' << a << ") != 0";
      return os.str();
    }
    for (std::size_t b = 0; b < m; ++b) {
      const double dab = (*this)(a, b);
      if (!std::isfinite(dab) || dab < 0.0 || (a != b && dab <= tol)) {
        os << "d(" << a << ',' << b << ") is not a positive distance";
        return os.str();
      }
      if (std::abs(dab - (*this)(b, a)) > tol) {
        os << "d(" << a << ',' << b << ") != d(" << b << ',' << a << ')';
        return os.str();
      }
      for (std::size_t k = 0; k < m; ++k)
        if (dab > (*this)(a, k) + (*this)(k, b) + tol) {
          os << "triangle inequality fails for (" << a << ',' << k << ',' << b << ')';
          return os.str();
        }
    }
  }
  return std::nullopt;
}

namespace {

// max c^T g  s.t.  A g <= b, g >= 0, with b >= 0 so the origin is a feasible basis.
// Dense tableau, Bland's rule.
double simplex_max(const std::vector<double>& c, const std::vector<std::vector<double>>& A,
                   const std::vector<double>& b) {
  const std::size_t nv = c.size(), r = A.size(), cols = nv + r + 1;
  std::vector<double> T((r + 1) * cols, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return T[i * cols + j]; };
  std::vector<std::size_t> basis(r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < nv; ++j) at(i, j) = A[i][j];
    at(i, nv + i) = 1.0;
    at(i, cols - 1) = b[i];
    basis[i] = nv + i;
  }
  for (std::size_t j = 0; j < nv; ++j) at(r, j) = -c[j];

  constexpr double eps = 1e-12;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > 100000) throw std::runtime_error("simplex: iteration limit");
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j)
      if (at(r, j) < -eps) {
        enter = j;
        break;
      }
    if (enter == cols) break;
    std::size_t leave = r;
    double best = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      const double a = at(i, enter);
      if (a <= eps) continue;
      const double ratio = at(i, cols - 1) / a;
      if (leave == r || ratio < best - eps || (ratio <= best + eps && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == r) throw std::runtime_error("simplex: unbounded");
    const double piv = at(leave, enter);
    for (std::size_t j = 0; j < cols; ++j) at(leave, j) /= piv;
    for (std::size_t i = 0; i <= r; ++i) {
      if (i == leave) continue;
      const double factor = at(i, enter);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) at(i, j) -= factor * at(leave, j);
    }
    basis[leave] = enter;
  }
  return at(r, cols - 1);
}

}  // namespace

double dbl_distance(std::span<const double> p, std::span<const double> q, const GroundMetric& d) {
  const std::size_t m = d.size();
  if (p.size() != m || q.size() != m) throw std::invalid_argument("dbl_distance: size mismatch with the metric");
  if (auto bad = d.violation()) throw std::invalid_argument("dbl_distance: invalid ground metric: " + *bad);
  std::vector<double> c(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (!std::isfinite(p[k]) || !std::isfinite(q[k])) throw std::invalid_argument("dbl_distance: non-finite mass");
    c[k] = p[k] - q[k];
  }
  if (m == 1) return std::abs(c[0]);

  // g = f + 1 in [0, 2]; keep only Lipschitz rows not implied by the bounds or by a shorter chain.
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (std::size_t k = 0; k < m; ++k) {
    A.emplace_back(m, 0.0);
    A.back()[k] = 1.0;
    b.push_back(2.0);
  }
  constexpr double tol = 1e-12;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t bb = 0; bb < m; ++bb) {
      if (a == bb || d(a, bb) >= 2.0 - tol) continue;
      bool implied = false;
      for (std::size_t k = 0; k < m && !implied; ++k)
        if (k != a && k != bb && d(a, k) + d(k, bb) <= d(a, bb) + tol) implied = true;
      if (implied) continue;
      A.emplace_back(m, 0.0);
      A.back()[a] = 1.0;
      A.back()[bb] = -1.0;
      b.push_back(d(a, bb));
    }
  const double total = std::accumulate(c.begin(), c.end(), 0.0);
  const double value = simplex_max(c, A, b) - total;
  return std::clamp(value, 0.0, 2.0);
}

double sup_path_distance(const Path& a, const Path& b, double horizon) {
  double worst = std::abs(a.initial - b.initial);
  std::vector<double> times;
  for (const auto& [t, v] : a.jumps)
    if (t <= horizon) times.push_back(t);
  for (const auto& [t, v] : b.jumps)
    if (t <= horizon) times.push_back(t);
  std::sort(times.begin(), times.end());
  std::size_t ia = 0, ib = 0;
  int va = a.initial, vb = b.initial;
  for (double t : times) {
    while (ia < a.jumps.size() && a.jumps[ia].first <= t) va = a.jumps[ia++].second;
    while (ib < b.jumps.size() && b.jumps[ib].first <= t) vb = b.jumps[ib++].second;
    worst = std::max(worst, static_cast<double>(std::abs(va - vb)));
  }
  return worst;
}

RateFit fit_rate(std::span<const double> xs, std::span<const double> errors, std::span<const double> ses) {
  const std::size_t k = xs.size();
  if (k != errors.size() || (!ses.empty() && ses.size() != k))
    throw std::invalid_argument("fit_rate: lengths differ");
  if (k < 4) throw std::invalid_argument("fit_rate: need at least 4 points");
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(xs[i] > 0.0) || !(errors[i] > 0.0)) throw std::invalid_argument("fit_rate: xs and errors must be > 0");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(errors[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(k);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 1e-24) throw std::invalid_argument("fit_rate: degenerate xs");
  RateFit fit;
  fit.xs.assign(xs.begin(), xs.end());
  fit.errors.assign(errors.begin(), errors.end());
  fit.ses.assign(ses.begin(), ses.end());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    ssr += r * r;
  }
  const double dof = static_cast<double>(k - 2);
  const double se = std::sqrt(ssr / dof / sxx);
  const double tq = boost::math::quantile(boost::math::students_t(dof), 0.975);
  fit.ci_low = fit.slope - tq * se;
  fit.ci_high = fit.slope + tq * se;
  return fit;
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) {
    // Theta-function form, accurate where the alternating series converges slowly.
    const double pi2 = M_PI * M_PI;
    double s = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double odd = 2.0 * k - 1.0;
      s += std::exp(-odd * odd * pi2 / (8.0 * x * x));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * M_PI) / x * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_normal_test(std::span<const double> samples, double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("ks_normal_test: sd must be > 0");
  if (samples.size() < 50) throw std::invalid_argument("ks_normal_test: need at least 50 samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = 0.5 * std::erfc(-(x[i] - mean) / (sd * M_SQRT2));
    dmax = std::max({dmax, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
  }
  const double rn = std::sqrt(n);
  return {dmax, kolmogorov_survival((rn + 0.12 + 0.11 / rn) * dmax)};
}

Estimate mean_se(std::span<const double> s) {
  if (s.empty()) throw std::invalid_argument("mean_se: no samples");
  const double n = static_cast<double>(s.size());
  const double m = std::accumulate(s.begin(), s.end(), 0.0) / n;
  if (s.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double v : s) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

Estimate variance_se(std::span<const double> s) {
  if (s.size() < 4) throw std::invalid_argument("variance_se: need at least 4 samples");
  const double n = static_cast<double>(s.size());
  const double m = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : s) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  return {m2 * n / (n - 1.0), std::sqrt(std::max(0.0, m4 - m2 * m2) / n)};
}

Estimate excess_kurtosis(std::span<const double> s) {
  if (s.size() < 100) throw std::invalid_argument("excess_kurtosis: need at least 100 samples");
  const std::size_t N = s.size();
  const double n = static_cast<double>(N);
  const double center = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double p1 = 0.0, p2 = 0.0, p3 = 0.0, p4 = 0.0;
  for (double v : s) {
    const double d = v - center;
    p1 += d;
    p2 += d * d;
    p3 += d * d * d;
    p4 += d * d * d * d;
  }
  // Kurtosis from raw power sums of the centered data.
  auto kurt = [](double a1, double a2, double a3, double a4, double cnt) {
    const double m = a1 / cnt;
    const double c2 = a2 / cnt - m * m;
    const double c4 = a4 / cnt - 4.0 * m * a3 / cnt + 6.0 * m * m * a2 / cnt - 3.0 * m * m * m * m;
    if (c2 <= 0.0) return 0.0;
    return c4 / (c2 * c2) - 3.0;
  };
  const double full = kurt(p1, p2, p3, p4, n);
  std::vector<double> loo(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double d = s[i] - center;
    loo[i] = kurt(p1 - d, p2 - d * d, p3 - d * d * d, p4 - d * d * d * d, n - 1.0);
  }
  const double mean_loo = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  return {full, std::sqrt((n - 1.0) / n * ss)};
}

}  // namespace mfnet
