#include "mfnet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfnet/errors.hpp"
#include "mfnet/parallel.hpp"
#include "mfnet/philox.hpp"
#include "mfnet/prm.hpp"

namespace mfnet {

namespace {

double beta_for(const ModelSpec& spec, const RunSettings& s, std::size_t n) {
  return std::isnan(s.beta) ? spec.beta(n) : s.beta;
}

void check_settings(const RunSettings& s, std::size_t min_replicas) {
  if (s.replicas < min_replicas)
    throw ValidationError("experiment needs at least " + std::to_string(min_replicas) + " replicas");
  if (!(s.event_budget > 0.0)) throw ValidationError("event budget must be positive");
  if (s.grid_intervals == 0) throw ValidationError("grid needs at least one interval");
}

void check_sweep(const std::vector<std::size_t>& ns) {
  if (ns.empty()) throw ValidationError("empty sweep");
  for (std::size_t n : ns)
    if (n == 0) throw ValidationError("sweep sizes must be positive");
}

// Refuse before any work when one replica of the largest system would exceed the budget.
void check_budget(const ModelSpec& spec, std::size_t n, double beta, const RunSettings& s) {
  const StreamFamily family = make_stream_family(spec, s.seed, beta);
  const double expected = family.expected_candidates(n);
  if (expected > s.event_budget)
    throw BudgetError("predicted " + std::to_string(expected) + " candidate events for n=" + std::to_string(n) +
                      " exceed the budget " + std::to_string(s.event_budget));
}

SimOptions sim_options(const RunSettings& s, double beta, std::size_t logged) {
  SimOptions o;
  o.beta = beta;
  o.logged_nodes = logged;
  o.event_budget = s.event_budget;
  return o;
}

std::vector<double> mean_over(const std::vector<std::vector<double>>& rows) {
  std::vector<double> out(rows.front().size(), 0.0);
  for (const auto& r : rows)
    for (std::size_t k = 0; k < r.size(); ++k) out[k] += r[k];
  for (double& v : out) v /= static_cast<double>(rows.size());
  return out;
}

// Runs `sys` through the report grid and stores mu^n at each point.
std::vector<std::vector<double>> snapshots(NSystem& sys, const StreamFamily& family, const std::vector<double>& grid) {
  std::vector<std::vector<double>> out;
  out.reserve(grid.size());
  for (double t : grid) {
    sys.run(family, t);
    out.push_back(sys.global_empirical());
  }
  return out;
}

}  // namespace

bool monotone_within_se(const std::vector<double>& values, const std::vector<double>& ses) {
  for (std::size_t k = 0; k + 1 < values.size(); ++k)
    if (values[k + 1] > values[k] + 2.0 * std::hypot(ses[k], ses[k + 1])) return false;
  return true;
}

LlnResult run_lln(const ModelSpec& spec, LlnVariant variant, const std::vector<std::size_t>& ns,
                  const RunSettings& settings, std::size_t n_ref) {
  check_sweep(ns);
  check_settings(settings, 2);
  const std::size_t n_max = *std::max_element(ns.begin(), ns.end());
  const double T = spec.horizon;

  LlnResult res;
  res.variant = variant;
  res.ns = ns;
  res.grid = uniform_grid(T, settings.grid_intervals);
  const std::vector<double> fine = uniform_grid(T, OdeOptions{}.steps);

  InvariantMeasureMap Q;
  MarginalLaw theta;
  if (variant == LlnVariant::FixedBeta) {
    if (!spec.beta.is_constant() && std::isnan(settings.beta))
      throw ValidationError("fixed-beta sweep needs a constant beta");
    if (n_ref < 4 * n_max) throw ValidationError("n_ref must be at least four times the largest swept n");
    check_budget(spec, n_ref, beta_for(spec, settings, n_ref), settings);
  } else if (variant == LlnVariant::Accel) {
    for (std::size_t n : ns) check_budget(spec, n, beta_for(spec, settings, n), settings);
    Q = invariant_map(spec);
    res.limit_law = forward_equation_accel(spec, Q, fine);
  } else {
    if (!spec.beta.is_constant() && std::isnan(settings.beta))
      throw ValidationError("independent-edge sweep needs a constant beta");
    const double beta = beta_for(spec, settings, n_max);
    check_budget(spec, n_max, beta, settings);
    auto [mu, th] = forward_equation_iid_markov(spec, beta, fine);
    res.limit_law = std::move(mu);
    theta = std::move(th);
  }

  const std::size_t R = settings.replicas, K = ns.size();
  std::vector<std::vector<double>> err(K, std::vector<double>(R, 0.0));
  // [k][r][t]
  std::vector<std::vector<std::vector<std::vector<double>>>> mus(
      K, std::vector<std::vector<std::vector<double>>>(R));

  parallel_for(R, settings.threads, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(settings.seed, r);
    std::optional<NSystem> ref;
    std::optional<StreamFamily> shared;
    if (variant != LlnVariant::Accel) {
      const double beta = beta_for(spec, settings, n_max);
      shared = make_stream_family(spec, seed, beta);
    }
    if (variant == LlnVariant::FixedBeta) {
      const double beta = beta_for(spec, settings, n_ref);
      ref.emplace(reference_limit_beta(spec, n_ref, seed, *shared,
                                       sim_options(settings, beta, std::min(n_ref, settings.tracked_nodes))));
    }
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t n = ns[k];
      const double beta = beta_for(spec, settings, n);
      const StreamFamily family = shared ? *shared : make_stream_family(spec, seed, beta);
      const std::size_t tracked = std::min(n, settings.tracked_nodes);
      NSystem sys = NSystem::init(spec, n, seed, sim_options(settings, beta, tracked));
      mus[k][r] = snapshots(sys, family, res.grid);
      double total = 0.0;
      for (std::size_t i = 0; i < tracked; ++i) {
        const auto id = static_cast<std::uint32_t>(i + 1);
        const Path& path = sys.log().nodes[i];
        if (variant == LlnVariant::FixedBeta) {
          total += sup_path_distance(path, ref->log().nodes[i], T);
        } else {
          const std::size_t x0 = initial_node_index(spec, seed, id);
          const Path lim = variant == LlnVariant::Accel
                               ? sample_accel_limit(spec, Q, res.limit_law, family.node(id), x0)
                               : sample_iid_limit(spec, res.limit_law, theta, family.node(id), x0);
          total += sup_path_distance(path, lim, T);
        }
      }
      err[k][r] = total / static_cast<double>(tracked);
    }
  });

  const GroundMetric metric = GroundMetric::line(spec.spaces.node.values());
  res.errors = err;
  for (std::size_t k = 0; k < K; ++k) {
    const Estimate e = mean_se(err[k]);
    res.mean.push_back(e.value);
    res.se.push_back(e.se);
    std::vector<std::vector<double>> avg(res.grid.size());
    for (std::size_t t = 0; t < res.grid.size(); ++t) {
      std::vector<std::vector<double>> rows;
      for (std::size_t r = 0; r < R; ++r) rows.push_back(mus[k][r][t]);
      avg[t] = mean_over(rows);
    }
    if (variant != LlnVariant::FixedBeta) {
      std::vector<double> d, per(res.grid.size(), 0.0);
      for (std::size_t t = 0; t < res.grid.size(); ++t) {
        const auto lim = res.limit_law.at(res.grid[t]);
        d.push_back(dbl_distance(avg[t], lim, metric));
        for (std::size_t r = 0; r < R; ++r) per[t] += dbl_distance(mus[k][r][t], lim, metric);
        per[t] /= static_cast<double>(R);
      }
      res.dbl_to_limit.push_back(std::move(d));
      res.replica_dbl.push_back(std::move(per));
    }
    res.mean_mu.push_back(std::move(avg));
  }
  if (K >= 4) {
    std::vector<double> xs(ns.begin(), ns.end());
    res.fit = fit_rate(xs, res.mean, res.se);
  }
  return res;
}

PocResult run_poc(const ModelSpec& spec, const std::vector<std::size_t>& ns, const RunSettings& settings,
                  std::size_t pairs, std::size_t bootstrap) {
  check_sweep(ns);
  check_settings(settings, 2);
  if (pairs == 0) throw ValidationError("poc needs at least one pair per replica");
  if (bootstrap < 2) throw ValidationError("poc needs at least two bootstrap resamples");
  for (std::size_t n : ns) {
    if (n < 2 * pairs) throw ValidationError("poc: n must be at least twice the number of pairs");
    check_budget(spec, n, beta_for(spec, settings, n), settings);
  }
  const std::size_t nx = spec.num_node_states(), R = settings.replicas;
  const GroundMetric metric = GroundMetric::product_l1(spec.spaces.node.values(), spec.spaces.node.values());

  // Product of the two coordinate marginals of a joint count table.
  auto distance = [nx, &metric](const std::vector<double>& counts) {
    double total = 0.0;
    for (double c : counts) total += c;
    std::vector<double> joint(nx * nx), a(nx, 0.0), b(nx, 0.0), prod(nx * nx);
    for (std::size_t u = 0; u < nx; ++u)
      for (std::size_t v = 0; v < nx; ++v) {
        joint[u * nx + v] = counts[u * nx + v] / total;
        a[u] += joint[u * nx + v];
        b[v] += joint[u * nx + v];
      }
    for (std::size_t u = 0; u < nx; ++u)
      for (std::size_t v = 0; v < nx; ++v) prod[u * nx + v] = a[u] * b[v];
    return std::pair{dbl_distance(joint, prod, metric), joint};
  };

  PocResult res;
  res.ns = ns;
  res.pairs = pairs;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const std::size_t n = ns[k];
    const double beta = beta_for(spec, settings, n);
    // [r][cell] pair counts of one replica
    std::vector<std::vector<double>> counts(R, std::vector<double>(nx * nx, 0.0));
    parallel_for(R, settings.threads, [&](std::size_t r) {
      const std::uint64_t seed = derive_seed(settings.seed, r);
      const StreamFamily family = make_stream_family(spec, seed, beta);
      NSystem sys = NSystem::init(spec, n, seed, sim_options(settings, beta, 0));
      sys.run(family, spec.horizon);
      for (std::size_t p = 0; p < pairs; ++p)
        counts[r][sys.node_index(2 * p) * nx + sys.node_index(2 * p + 1)] += 1.0;
    });
    std::vector<double> pooled(nx * nx, 0.0);
    for (const auto& c : counts)
      for (std::size_t m = 0; m < pooled.size(); ++m) pooled[m] += c[m];
    auto [d, joint] = distance(pooled);

    CounterRng rng(derive_seed(settings.seed, 0xB0075u), k);
    std::vector<double> boot(bootstrap);
    for (std::size_t b = 0; b < bootstrap; ++b) {
      std::vector<double> resampled(nx * nx, 0.0);
      for (std::size_t r = 0; r < R; ++r) {
        const auto pick = std::min(R - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(R)));
        for (std::size_t m = 0; m < resampled.size(); ++m) resampled[m] += counts[pick][m];
      }
      boot[b] = distance(resampled).first;
    }
    double mean = 0.0, var = 0.0;
    for (double v : boot) mean += v;
    mean /= static_cast<double>(bootstrap);
    for (double v : boot) var += (v - mean) * (v - mean);
    res.dbl.push_back(d);
    res.dbl_se.push_back(std::sqrt(var / static_cast<double>(bootstrap - 1)));
    res.joint.push_back(std::move(joint));
  }
  res.monotone = monotone_within_se(res.dbl, res.dbl_se);
  return res;
}

BetaComparisonResult run_beta_comparison(const ModelSpec& spec, const std::vector<double>& betas, std::size_t n_ref,
                                         const RunSettings& settings) {
  if (betas.empty()) throw ValidationError("empty beta sweep");
  for (double b : betas)
    if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("beta values must be positive and finite");
  if (n_ref == 0) throw ValidationError("n_ref must be positive");
  check_settings(settings, 2);
  const double beta_max = *std::max_element(betas.begin(), betas.end());
  check_budget(spec, n_ref, beta_max, settings);

  const double T = spec.horizon;
  const InvariantMeasureMap Q = invariant_map(spec);
  const MarginalLaw mu = forward_equation_accel(spec, Q, uniform_grid(T, OdeOptions{}.steps));
  const std::vector<double> muT = mu.at(T);
  const std::size_t nx = spec.num_node_states(), ne = spec.num_edge_states();
  const GroundMetric metric = GroundMetric::product_l1(spec.spaces.node.values(), spec.spaces.edge.values());

  const std::size_t R = settings.replicas, B = betas.size();
  const std::size_t tracked = std::min(n_ref, settings.tracked_nodes);
  std::vector<std::vector<double>> err(B, std::vector<double>(R)), nu(B, std::vector<double>(R));

  parallel_for(R, settings.threads, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(settings.seed, r);
    const StreamFamily family = make_stream_family(spec, seed, beta_max);
    std::vector<Path> limits;
    for (std::size_t i = 0; i < tracked; ++i) {
      const auto id = static_cast<std::uint32_t>(i + 1);
      limits.push_back(sample_accel_limit(spec, Q, mu, family.node(id), initial_node_index(spec, seed, id)));
    }
    std::vector<double> target(nx * ne);
    const std::size_t x1 = *spec.spaces.node.index_of(limits[0].final_value());
    for (std::size_t xt = 0; xt < nx; ++xt)
      for (std::size_t xi = 0; xi < ne; ++xi) target[xt * ne + xi] = muT[xt] * Q(x1, xt, xi);
    for (std::size_t b = 0; b < B; ++b) {
      const NSystem sys = reference_limit_beta(spec, n_ref, seed, family, sim_options(settings, betas[b], tracked));
      double total = 0.0;
      for (std::size_t i = 0; i < tracked; ++i) total += sup_path_distance(sys.log().nodes[i], limits[i], T);
      err[b][r] = total / static_cast<double>(tracked);
      nu[b][r] = dbl_distance(sys.local_empirical(0), target, metric);
    }
  });

  BetaComparisonResult res;
  res.betas = betas;
  res.n_ref = n_ref;
  res.errors = err;
  for (std::size_t b = 0; b < B; ++b) {
    const Estimate e = mean_se(err[b]);
    res.mean.push_back(e.value);
    res.se.push_back(e.se);
    const Estimate d = mean_se(nu[b]);
    res.nu_dbl.push_back(d.value);
    res.nu_dbl_se.push_back(d.se);
  }
  if (B >= 4) res.fit = fit_rate(betas, res.mean, res.se);
  res.nu_monotone = monotone_within_se(res.nu_dbl, res.nu_dbl_se);
  return res;
}

RiccatiResult run_riccati(const ModelSpec& spec, std::size_t n, const RunSettings& settings) {
  if (n == 0) throw ValidationError("n must be positive");
  check_settings(settings, 1);
  const double beta = beta_for(spec, settings, n);
  check_budget(spec, n, beta, settings);

  RiccatiResult res;
  res.n = n;
  res.grid = uniform_grid(spec.horizon, settings.grid_intervals);
  const InvariantMeasureMap Q = invariant_map(spec);
  res.riccati = forward_equation_accel(spec, Q, res.grid);

  const std::size_t R = settings.replicas;
  std::vector<std::vector<std::vector<double>>> mus(R);
  parallel_for(R, settings.threads, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(settings.seed, r);
    const StreamFamily family = make_stream_family(spec, seed, beta);
    NSystem sys = NSystem::init(spec, n, seed, sim_options(settings, beta, 0));
    mus[r] = snapshots(sys, family, res.grid);
  });
  const GroundMetric metric = GroundMetric::line(spec.spaces.node.values());
  for (std::size_t t = 0; t < res.grid.size(); ++t) {
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < R; ++r) rows.push_back(mus[r][t]);
    res.mean_mu.push_back(mean_over(rows));
    res.dbl.push_back(dbl_distance(res.mean_mu.back(), res.riccati.p[t], metric));
    double per = 0.0;
    for (std::size_t r = 0; r < R; ++r) per += dbl_distance(mus[r][t], res.riccati.p[t], metric);
    res.replica_dbl.push_back(per / static_cast<double>(R));
  }
  return res;
}

}  // namespace mfnet
