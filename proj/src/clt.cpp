#include "mfnet/clt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mfnet/errors.hpp"
#include "mfnet/limits.hpp"
#include "mfnet/parallel.hpp"
#include "mfnet/philox.hpp"
#include "mfnet/prm.hpp"

namespace mfnet {

Functional Functional::single_time(double t, double a) { return {Kind::SingleTime, {a}, {t}}; }

Functional Functional::multi_time(std::vector<double> a, std::vector<double> t) {
  return {Kind::MultiTime, std::move(a), std::move(t)};
}

void Functional::check(double horizon) const {
  if (a.empty() || a.size() != t.size()) throw std::invalid_argument("Functional: need matching nonempty a and t");
  if (kind == Kind::SingleTime && a.size() != 1) throw std::invalid_argument("Functional: single_time has one term");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < 0.0 || t[k] > horizon) throw std::invalid_argument("Functional: times must lie in [0, T]");
    if (k > 0 && !(t[k] > t[k - 1])) throw std::invalid_argument("Functional: times must be increasing");
  }
}

double drift_constant(const ModelSpec& spec) {
  if (!spec.clt) throw std::invalid_argument("drift_constant: spec has no separable example");
  double kappa = 0.0;
  for (std::size_t y = 0; y < spec.num_marks(); ++y) kappa += spec.spaces.marks.value(y) * spec.clt->c1[y] * spec.rho[y];
  return kappa;
}

double Functional::evaluate(const Path& path, const ModelSpec& spec) const {
  const double kappa = drift_constant(spec);
  const auto& b1 = spec.clt->b1;
  const auto& states = spec.spaces.node;
  auto b1_of = [&](int v) { return b1[*states.index_of(v)]; };
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double drift = kappa == 0.0 ? 0.0 : kappa * path.integral(t[k], b1_of);
    total += a[k] * (path.at(t[k]) - drift);
  }
  return total;
}

void require_clt_spec(const ModelSpec& spec) {
  if (!spec.clt) throw ValidationError("model has no clt_example block");
  const auto report = validate(spec);
  if (!report.ok()) throw ValidationError("separable example fails validation:\n" + report.summary());
}

double eta_x(const TrajectoryLog& log, const Functional& phi, const ModelSpec& spec, double centering) {
  require_clt_spec(spec);
  if (log.nodes.empty()) throw std::invalid_argument("eta_x: empty trajectory log");
  double sum = 0.0;
  for (const auto& p : log.nodes) sum += phi.evaluate(p, spec) - centering;
  return sum / std::sqrt(static_cast<double>(log.nodes.size()));
}

namespace {

// Jump targets and rates of the autonomous chain, flattened per state.
struct AutonomousChain {
  std::vector<std::vector<std::pair<std::size_t, double>>> out;
  std::vector<double> total;

  explicit AutonomousChain(const ModelSpec& spec) {
    const Eigen::MatrixXd R = autonomous_generator(spec);
    const auto m = static_cast<std::size_t>(R.rows());
    out.resize(m);
    total.resize(m);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        const double r = R(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (a != b && r > 0.0) out[a].emplace_back(b, r);
      }
      total[a] = -R(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a));
    }
  }

  Path simulate(const ModelSpec& spec, CounterRng& rng) const {
    std::size_t x = sample_index(spec.mu0, rng.uniform());
    Path path;
    path.initial = spec.spaces.node.value(x);
    double t = 0.0;
    for (;;) {
      if (!(total[x] > 0.0)) break;
      t += rng.exponential(total[x]);
      if (t > spec.horizon) break;
      double u = rng.uniform() * total[x];
      std::size_t next = out[x].back().first;
      for (const auto& [b, r] : out[x]) {
        if (u < r) {
          next = b;
          break;
        }
        u -= r;
      }
      x = next;
      path.jumps.emplace_back(t, spec.spaces.node.value(x));
    }
    return path;
  }
};

}  // namespace

Path simulate_autonomous(const ModelSpec& spec, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  return AutonomousChain(spec).simulate(spec, rng);
}

Estimate clt_reference_variance(const ModelSpec& spec, const Functional& phi, std::uint64_t seed,
                                std::size_t mc_chains) {
  phi.check(spec.horizon);
  if (phi.a.size() == 1) {
    const double t = phi.t[0];
    std::vector<double> p = spec.mu0;
    if (t > 0.0) {
      const std::vector<double> grid{0.0, t};
      p = forward_linear(autonomous_generator(spec), spec.mu0, grid).p.back();
    }
    double m2 = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double v = spec.spaces.node.value(k);
      m2 += v * v * p[k];
    }
    return {phi.a[0] * phi.a[0] * m2, 0.0};
  }
  if (mc_chains < 2) throw std::invalid_argument("clt_reference_variance: need at least 2 chains");
  const AutonomousChain chain(spec);
  std::vector<double> values(mc_chains);
  for (std::size_t m = 0; m < mc_chains; ++m) {
    CounterRng rng(seed, m);
    const Path p = chain.simulate(spec, rng);
    double s = 0.0;
    for (std::size_t k = 0; k < phi.a.size(); ++k) s += phi.a[k] * p.at(phi.t[k]);
    values[m] = s * s;
  }
  return mean_se(values);
}

std::vector<CltReport> run_clt_experiment(const ModelSpec& spec, std::size_t n, std::size_t replicas,
                                          const std::vector<Functional>& phis, std::uint64_t seed,
                                          CltOptions options) {
  require_clt_spec(spec);
  if (n == 0 || replicas < 50) throw std::invalid_argument("run_clt_experiment: need n >= 1 and >= 50 replicas");
  for (const auto& phi : phis) phi.check(spec.horizon);
  const double beta = spec.beta(n);
  {
    const auto probe = make_stream_family(spec, seed, beta);
    const double per_replica = probe.expected_candidates(n);
    if (per_replica > options.event_budget) {
      std::ostringstream os;
      os << "expected candidate-event count " << per_replica << " per replica exceeds budget " << options.event_budget;
      throw BudgetError(os.str());
    }
  }

  std::vector<std::vector<double>> eta(phis.size(), std::vector<double>(replicas));
  parallel_for(replicas, options.threads, [&](std::size_t r) {
    const std::uint64_t s = derive_seed(seed, r);
    SimOptions sim;
    sim.event_budget = options.event_budget;
    NSystem sys = NSystem::init(spec, n, s, sim);
    sys.run(make_stream_family(spec, s, beta), spec.horizon);
    for (std::size_t f = 0; f < phis.size(); ++f) eta[f][r] = eta_x(sys.log(), phis[f], spec);
  });

  std::vector<CltReport> reports;
  for (std::size_t f = 0; f < phis.size(); ++f) {
    CltReport rep;
    rep.n = n;
    rep.replicas = replicas;
    const auto ref = clt_reference_variance(spec, phis[f], derive_seed(seed, 0xC1A55ull + f), options.mc_chains);
    rep.sigma2_ref = ref.value;
    rep.sigma2_ref_se = ref.se;
    rep.sigma2_ref_mc = phis[f].a.size() > 1;
    const auto var = variance_se(eta[f]);
    rep.sample_var = var.value;
    rep.sample_var_se = var.se;
    const double gap = std::abs(rep.sample_var - rep.sigma2_ref);
    rep.pass_relative = gap <= options.variance_tolerance * rep.sigma2_ref;
    rep.pass_3se = gap <= 3.0 * std::hypot(rep.sample_var_se, rep.sigma2_ref_se);
    if (rep.sigma2_ref > 0.0) {
      const auto ks = ks_normal_test(eta[f], 0.0, std::sqrt(rep.sigma2_ref));
      rep.ks_stat = ks.statistic;
      rep.ks_p = ks.p_value;
      if (replicas >= 100) {
        const auto k = excess_kurtosis(eta[f]);
        rep.kurtosis = k.value;
        rep.kurtosis_se = k.se;
      }
    } else {
      const bool all_zero = std::all_of(eta[f].begin(), eta[f].end(), [](double v) { return v == 0.0; });
      rep.ks_stat = all_zero ? 0.0 : 1.0;
      rep.ks_p = all_zero ? 1.0 : 0.0;
      rep.pass_relative = all_zero;
    }
    rep.pass_ks = rep.ks_p >= options.ks_alpha;
    rep.eta = std::move(eta[f]);
    reports.push_back(std::move(rep));
  }
  return reports;
}

KurtosisReport edge_functional_kurtosis(const ModelSpec& spec, std::size_t n, std::size_t replicas,
                                        std::uint64_t seed, CltOptions options) {
  if (n == 0 || replicas < 100) throw std::invalid_argument("edge_functional_kurtosis: need n >= 1, >= 100 replicas");
  const std::size_t ne = spec.num_edge_states();
  std::vector<double> b2(ne);
  for (std::size_t xi = 0; xi < ne; ++xi)
    b2[xi] = spec.clt ? spec.clt->b2[xi] : static_cast<double>(spec.spaces.edge.value(xi));
  const double beta = spec.beta(n);
  std::vector<double> values(replicas);
  parallel_for(replicas, options.threads, [&](std::size_t r) {
    const std::uint64_t s = derive_seed(seed, r);
    SimOptions sim;
    sim.logged_nodes = 0;
    sim.event_budget = options.event_budget;
    NSystem sys = NSystem::init(spec, n, s, sim);
    sys.run(make_stream_family(spec, s, beta), spec.horizon);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += b2[sys.edge_index(0, j)];
    values[r] = sum / std::sqrt(static_cast<double>(n));
  });
  KurtosisReport rep;
  rep.n = n;
  rep.replicas = replicas;
  rep.mean = mean_se(values).value;
  for (double& v : values) v -= rep.mean;
  const auto k = excess_kurtosis(values);
  rep.kurtosis = k.value;
  rep.kurtosis_se = k.se;
  rep.samples = std::move(values);
  return rep;
}

TraceReport trace_lambda_estimate(const ModelSpec& spec, std::size_t n_mc, const std::vector<double>& grid,
                                  std::uint64_t seed) {
  require_clt_spec(spec);
  if (n_mc < 2) throw std::invalid_argument("trace_lambda_estimate: need at least 2 pairs");
  if (grid.size() < 2 || grid.front() != 0.0 || grid.back() > spec.horizon)
    throw std::invalid_argument("trace_lambda_estimate: grid must start at 0 and stay within [0, T]");
  const auto& c = *spec.clt;
  const std::size_t ny = spec.num_marks(), K = grid.size();
  const AutonomousChain chain(spec);

  std::vector<double> weight(K, 0.0);  // trapezoid weights
  for (std::size_t k = 1; k < K; ++k) {
    const double h = grid[k] - grid[k - 1];
    weight[k - 1] += 0.5 * h;
    weight[k] += 0.5 * h;
  }
  std::vector<double> sum(ny * K, 0.0), sumsq(ny * K, 0.0), per_pair(n_mc, 0.0);
  for (std::size_t m = 0; m < n_mc; ++m) {
    CounterRng r1(seed, 2 * m), r2(seed, 2 * m + 1);
    const Path p1 = chain.simulate(spec, r1), p2 = chain.simulate(spec, r2);
    double J = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t x1 = *spec.spaces.node.index_of(p1.at(grid[k]));
      const std::size_t x2 = *spec.spaces.node.index_of(p2.at(grid[k]));
      for (std::size_t y = 0; y < ny; ++y) {
        double ratio = 0.0;
        if (spec.node_target(x1, y)) {
          const double den = c.c0[y] * c.b0[x1] + c.c3[y];
          if (den < c.epsilon - 1e-12) throw NumericalError("trace_lambda_estimate: denominator below epsilon");
          ratio = c.c1[y] * c.c1[y] * c.b1[x2] * c.b1[x2] / den;
        }
        sum[y * K + k] += ratio;
        sumsq[y * K + k] += ratio * ratio;
        J += spec.rho[y] * weight[k] * ratio;
      }
    }
    per_pair[m] = J;
  }
  TraceReport rep;
  rep.grid = grid;
  rep.lambda.assign(ny, std::vector<double>(K));
  rep.lambda_se.assign(ny, std::vector<double>(K));
  const double nm = static_cast<double>(n_mc);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t k = 0; k < K; ++k) {
      const double mean = sum[y * K + k] / nm;
      const double var = std::max(0.0, sumsq[y * K + k] / nm - mean * mean) * nm / (nm - 1.0);
      rep.lambda[y][k] = mean;
      rep.lambda_se[y][k] = std::sqrt(var / nm);
    }
  const auto tr = mean_se(per_pair);
  rep.trace = tr.value;
  rep.trace_se = tr.se;
  return rep;
}

}  // namespace mfnet
