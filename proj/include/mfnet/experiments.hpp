#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mfnet/limits.hpp"
#include "mfnet/metrics.hpp"
#include "mfnet/model.hpp"

namespace mfnet {

struct RunSettings {
  std::uint64_t seed = 1;
  std::size_t replicas = 50;
  std::size_t threads = 1;
  double event_budget = 5e8;
  std::size_t grid_intervals = 20;
  /// Coupled errors average over nodes 1..min(n, tracked_nodes).
  std::size_t tracked_nodes = 10;
  /// Constant edge speed-up overriding spec.beta(n); NaN keeps the schedule.
  double beta = std::numeric_limits<double>::quiet_NaN();
};

enum class LlnVariant { FixedBeta, Accel, Iid };

struct LlnResult {
  LlnVariant variant = LlnVariant::Accel;
  std::vector<std::size_t> ns;
  std::vector<std::vector<double>> errors;  // [n][replica] mean sup-path error over tracked nodes
  std::vector<double> mean, se;
  RateFit fit;
  std::vector<double> grid;
  std::vector<std::vector<std::vector<double>>> mean_mu;  // [n][t] replica-averaged mu^n(t)
  std::vector<std::vector<double>> dbl_to_limit;         // [n][t], empty for FixedBeta
  std::vector<std::vector<double>> replica_dbl;          // [n][t] mean of per-replica d_BL(mu^n(t), limit)
  MarginalLaw limit_law;                                  // empty for FixedBeta
};

/// Coupled LLN sweep. Replica r uses seed derive_seed(seed, r) for every n, so the
/// n-systems and the limit object read the same node streams.
///  FixedBeta: n-system vs an n_ref surrogate at the same constant beta.
///  Accel:     n-system with beta = spec.beta(n) vs the accelerated-limit sampler.
///  Iid:       n-system vs the independent-edge limit sampler.
LlnResult run_lln(const ModelSpec& spec, LlnVariant variant, const std::vector<std::size_t>& ns,
                  const RunSettings& settings, std::size_t n_ref = 0);

struct PocResult {
  std::vector<std::size_t> ns;
  std::size_t pairs = 0;
  std::vector<std::vector<double>> joint;  // [n] empirical law of (X_{2k-1}(T), X_{2k}(T)), row-major
  std::vector<double> dbl, dbl_se;
  bool monotone = false;
};

/// Joint law of disjoint node pairs at T over replicas vs the product of its marginals.
/// SEs by a replica-level bootstrap with `bootstrap` resamples.
PocResult run_poc(const ModelSpec& spec, const std::vector<std::size_t>& ns, const RunSettings& settings,
                  std::size_t pairs = 5, std::size_t bootstrap = 200);

struct BetaComparisonResult {
  std::vector<double> betas;
  std::size_t n_ref = 0;
  std::vector<std::vector<double>> errors;  // [beta][replica]
  std::vector<double> mean, se;
  RateFit fit;
  std::vector<double> nu_dbl, nu_dbl_se;  // d_BL(nu_1 of the surrogate at T, mu_T (x) Q(X_1(T), .))
  bool nu_monotone = false;
};

/// beta-systems of size n_ref sharing one stream family (beta_max = max beta) vs the accelerated limit.
BetaComparisonResult run_beta_comparison(const ModelSpec& spec, const std::vector<double>& betas, std::size_t n_ref,
                                         const RunSettings& settings);

struct RiccatiResult {
  std::size_t n = 0;
  std::vector<double> grid;
  MarginalLaw riccati;
  std::vector<std::vector<double>> mean_mu;  // [t]
  std::vector<double> dbl;                   // [t]
  std::vector<double> replica_dbl;           // [t] mean over replicas of d_BL(mu^n(t), riccati)
};

/// Replica-averaged mu^n(t) at beta = spec.beta(n) against the accelerated forward equation.
RiccatiResult run_riccati(const ModelSpec& spec, std::size_t n, const RunSettings& settings);

/// d_k+1 <= d_k + 2 sqrt(se_k^2 + se_k+1^2) for every consecutive pair.
bool monotone_within_se(const std::vector<double>& values, const std::vector<double>& ses);

}  // namespace mfnet
