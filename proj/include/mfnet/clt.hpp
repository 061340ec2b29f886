#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfnet/metrics.hpp"
#include "mfnet/model.hpp"
#include "mfnet/nsystem.hpp"
#include "mfnet/path.hpp"

namespace mfnet {

// phi(x) = sum_k a_k (x(t_k) - kappa * int_0^{t_k} b1(x_s) ds), kappa = sum_y y c1(y) rho(y).
struct Functional {
  enum class Kind { SingleTime, MultiTime };
  Kind kind = Kind::SingleTime;
  std::vector<double> a, t;

  static Functional single_time(double t, double a = 1.0);
  static Functional multi_time(std::vector<double> a, std::vector<double> t);

  /// Throws std::invalid_argument unless 0 <= t_1 < ... < t_m <= horizon.
  void check(double horizon) const;
  double evaluate(const Path& path, const ModelSpec& spec) const;
};

/// sum_y y c1(y) rho(y)
double drift_constant(const ModelSpec& spec);

/// Throws ValidationError unless the spec is a valid separable example.
void require_clt_spec(const ModelSpec& spec);

/// sqrt(n) (mean of phi over all logged paths - centering); n = number of logged paths.
/// The centering of the separable example is 0 by symmetry.
double eta_x(const TrajectoryLog& log, const Functional& phi, const ModelSpec& spec, double centering = 0.0);

/// Autonomous chain with rate c0 b0(x) + c3 from mu0, simulated by exponential clocks.
Path simulate_autonomous(const ModelSpec& spec, std::uint64_t seed, std::uint64_t stream);

struct CltOptions {
  std::size_t threads = 1;
  double event_budget = 5e8;
  std::size_t mc_chains = 1000000;
  double variance_tolerance = 0.10;
  double ks_alpha = 0.01;
};

struct CltReport {
  std::size_t n = 0, replicas = 0;
  double sigma2_ref = 0.0, sigma2_ref_se = 0.0;
  bool sigma2_ref_mc = false;
  double sample_var = 0.0, sample_var_se = 0.0;
  double ks_stat = 0.0, ks_p = 1.0;
  double kurtosis = 0.0, kurtosis_se = 0.0;
  bool pass_relative = false, pass_3se = false, pass_ks = false;
  std::vector<double> eta;
};

/// Reference variance E[(sum_k a_k X(t_k))^2]: forward equation for one time, Monte Carlo otherwise.
Estimate clt_reference_variance(const ModelSpec& spec, const Functional& phi, std::uint64_t seed,
                                std::size_t mc_chains);

/// R independent n-systems (replica r seeded with derive_seed(seed, r)); one report per functional.
std::vector<CltReport> run_clt_experiment(const ModelSpec& spec, std::size_t n, std::size_t replicas,
                                          const std::vector<Functional>& phis, std::uint64_t seed,
                                          CltOptions options = {});

struct KurtosisReport {
  std::size_t n = 0, replicas = 0;
  double mean = 0.0;
  double kurtosis = 0.0, kurtosis_se = 0.0;
  std::vector<double> samples;  // sqrt(n) (<b2(xi_T), nu_1^n> - replica mean)
};

/// Fluctuation of the edge functional b2(xi_1j(T)) seen from node 1, unconditionally centered.
KurtosisReport edge_functional_kurtosis(const ModelSpec& spec, std::size_t n, std::size_t replicas,
                                        std::uint64_t seed, CltOptions options = {});

struct TraceReport {
  std::vector<double> grid;
  std::vector<std::vector<double>> lambda, lambda_se;  // [mark][grid point]
  double trace = 0.0, trace_se = 0.0;
};

/// Monte Carlo over independent pairs of autonomous chains of
/// lambda(t, y) = E[c1(y)^2 b1(X2(t))^2 / (c0(y) b0(X1(t)) + c3(y))]; zero where the jump leaves S_x.
/// The trace integrates sum_y rho(y) lambda(., y) by the trapezoid rule on `grid`.
TraceReport trace_lambda_estimate(const ModelSpec& spec, std::size_t n_mc, const std::vector<double>& grid,
                                  std::uint64_t seed);

}  // namespace mfnet
