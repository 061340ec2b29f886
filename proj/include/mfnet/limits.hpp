#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfnet/model.hpp"
#include "mfnet/nsystem.hpp"
#include "mfnet/path.hpp"
#include "mfnet/prm.hpp"

namespace mfnet {

/// Q(x, x~, .) for every pair of node states.
struct InvariantMeasureMap {
  std::size_t nodes = 0, edges = 0;
  std::vector<double> q;  // [(x * nodes + xt) * edges + xi]

  double operator()(std::size_t x, std::size_t xt, std::size_t xi) const { return q[(x * nodes + xt) * edges + xi]; }
  std::span<const double> at(std::size_t x, std::size_t xt) const {
    return {q.data() + (x * nodes + xt) * edges, edges};
  }
  void write_csv(const std::string& path, const ModelSpec& spec) const;
};

/// Probability vectors on a time grid; linear interpolation in between.
struct MarginalLaw {
  std::vector<double> grid;
  std::vector<std::vector<double>> p;

  std::vector<double> at(double t) const;
  void write_csv(const std::string& path, const IndexedStates& states) const;
};

struct OdeOptions {
  /// RK4 steps over [0, T]; each grid interval gets at least one.
  std::size_t steps = 2000;
};

std::vector<double> uniform_grid(double horizon, std::size_t intervals);

/// Generator of the frozen edge chain: R(xi, xi+y) = rho(y) Gamma~(y, xi, x, x~), rows sum to 0.
Eigen::MatrixXd edge_generator(const ModelSpec& spec, std::size_t x, std::size_t xt);

/// Unique stationary law of a finite generator. Throws NumericalError naming the
/// communicating classes when there is not exactly one closed class.
std::vector<double> stationary_distribution(const Eigen::MatrixXd& generator);
/// max_xi |sum_xi' pi(xi') R(xi', xi)|
double stationarity_residual(const Eigen::MatrixXd& generator, std::span<const double> pi);

std::vector<double> invariant_measure(const ModelSpec& spec, std::size_t x, std::size_t xt);
InvariantMeasureMap invariant_map(const ModelSpec& spec);

/// dp/dt = p R from p0, reported on `grid`.
MarginalLaw forward_linear(const Eigen::MatrixXd& generator, std::span<const double> p0,
                           std::span<const double> grid, OdeOptions options = {});

/// Marginal flow of the accelerated limit (the quadratic forward equation in p).
MarginalLaw forward_equation_accel(const ModelSpec& spec, const InvariantMeasureMap& Q, std::span<const double> grid,
                                   OdeOptions options = {});

/// Marginal flow of the limit with independent edges, theta(t) given on its own grid.
MarginalLaw forward_equation_iid(const ModelSpec& spec, const MarginalLaw& theta, std::span<const double> grid,
                                 OdeOptions options = {});

/// Same, with theta(t) integrated jointly from theta0 by the edge chain beta * Gamma~.
/// Requires Gamma~ not to depend on the endpoint states. Returns {mu, theta}.
std::pair<MarginalLaw, MarginalLaw> forward_equation_iid_markov(const ModelSpec& spec, double beta,
                                                                std::span<const double> grid,
                                                                OdeOptions options = {});

/// Largest entrywise gap between two solutions reported on the same grid.
double max_law_gap(const MarginalLaw& a, const MarginalLaw& b);

/// Index of the initial state that node `id` (1-based) gets from NSystem::init with `seed`.
std::size_t initial_node_index(const ModelSpec& spec, std::uint64_t seed, std::uint32_t id);

/// Accelerated-limit particle driven by the node stream `stream`, thinned against mu_t (x) Q.
Path sample_accel_limit(const ModelSpec& spec, const InvariantMeasureMap& Q, const MarginalLaw& mu,
                        const PrmStream& stream, std::size_t x0);

/// Independent-edge limit particle, thinned against Gamma(y, X, mu_t (x) theta_t).
Path sample_iid_limit(const ModelSpec& spec, const MarginalLaw& mu, const MarginalLaw& theta,
                      const PrmStream& stream, std::size_t x0);

/// Large-system surrogate of the fixed-beta limit, run to T on `family`.
NSystem reference_limit_beta(const ModelSpec& spec, std::size_t n_ref, std::uint64_t seed,
                             const StreamFamily& family, SimOptions options = {});

/// Generator of the separable example's node chain with rate c0 b0(x) + c3 (jumps leaving S_x dropped).
Eigen::MatrixXd autonomous_generator(const ModelSpec& spec);
MarginalLaw autonomous_law(const ModelSpec& spec, std::span<const double> grid, OdeOptions options = {});
/// E[X(T)^2] of the autonomous chain started from mu0.
double autonomous_second_moment(const ModelSpec& spec, OdeOptions options = {});

}  // namespace mfnet
