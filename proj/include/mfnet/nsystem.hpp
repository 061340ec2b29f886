#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "mfnet/model.hpp"
#include "mfnet/path.hpp"
#include "mfnet/prm.hpp"

namespace mfnet {

struct EdgeJump {
  std::uint32_t i, j;  // 0-based
  double time;
  int state;
};

struct TrajectoryLog {
  std::vector<Path> nodes;       // one per logged node, indexed like the system
  std::vector<EdgeJump> edges;   // only when edge logging is enabled
};

struct SimOptions {
  /// Edge speed-up; NaN means spec.beta(n).
  double beta = std::numeric_limits<double>::quiet_NaN();
  /// Nodes 0..logged_nodes-1 get a trajectory.
  std::size_t logged_nodes = std::numeric_limits<std::size_t>::max();
  bool log_edges = false;
  /// Recompute every aggregate after each event and compare (slow).
  bool verify_aggregates = false;
  double event_budget = 5e8;
};

struct SimCounters {
  std::uint64_t node_candidates = 0, node_accepted = 0;
  std::uint64_t edge_candidates = 0, edge_accepted = 0;
};

// Event-driven simulation of the n-node system driven by shared PRM streams.
//
// Node candidates are processed in global time order. Edges advance lazily:
// edge (i,j) only depends on X_i and X_j, so its own atoms are replayed up to
// time s right before X_i or X_j change, or before node i reads its rate.
// Between those points its endpoints are frozen, which keeps the result equal
// to a single global time-ordered pass.
class NSystem {
 public:
  /// X_i ~ mu0 and Xi_ij ~ theta0 i.i.d. (diagonal included), keyed by (seed, id).
  static NSystem init(const ModelSpec& spec, std::size_t n, std::uint64_t seed, SimOptions options = {});

  /// Advance to `until` (<= T) using the streams of `family`. All calls must use the same family.
  const TrajectoryLog& run(const StreamFamily& family, double until);

  std::size_t size() const { return n_; }
  double time() const { return t_; }
  double beta() const { return beta_; }
  const ModelSpec& spec() const { return *spec_; }

  /// State values (not indices).
  int node_state(std::size_t i) const;
  int edge_state(std::size_t i, std::size_t j) const;
  std::size_t node_index(std::size_t i) const { return x_[i]; }
  std::size_t edge_index(std::size_t i, std::size_t j) const { return xi_[i * n_ + j]; }

  /// A_i(y, x) = sum_j gamma(y, x, X_j, Xi_ij).
  double aggregate(std::size_t i, std::size_t y, std::size_t x) const { return agg_[(i * ny_ + y) * nx_ + x]; }
  /// Largest relative deviation of the stored aggregates from a full recomputation.
  double aggregate_drift() const;

  /// nu_i^n: row-major (x~, xi~) probability vector.
  std::vector<double> local_empirical(std::size_t i) const;
  /// mu^n on S_x.
  std::vector<double> global_empirical() const;

  const TrajectoryLog& log() const { return log_; }
  const SimCounters& counters() const { return counters_; }

 private:
  NSystem() = default;
  void build_tables();
  void rebuild_aggregates();
  void ensure_cursors(const StreamFamily& family);
  void catch_up_edge(std::size_t i, std::size_t j, double s, bool inclusive);
  void process_edge_atom(std::size_t i, std::size_t j, std::size_t y, double s);
  void apply_node_jump(std::size_t i, std::size_t target, double s);

  std::shared_ptr<const ModelSpec> spec_;
  SimOptions options_;
  std::size_t n_ = 0, ny_ = 0, nx_ = 0, ne_ = 0;
  double beta_ = 0.0, t_ = 0.0;

  std::vector<std::uint16_t> x_;
  std::vector<std::uint8_t> xi_;
  std::vector<double> agg_;

  // gamma with (y, x) innermost: gx_[((xt * ne + xi) * ny + y) * nx + x]
  std::vector<double> gx_;
  // beta * Gamma~(y, xi, x, xt), same layout as EdgeKernel
  std::vector<double> edge_rate_;
  std::vector<int> node_target_, edge_target_;

  std::optional<StreamFamily> family_;
  std::vector<double> node_next_, edge_next_;
  std::vector<std::uint32_t> node_ord_, edge_ord_;
  std::vector<double> delta_;

  TrajectoryLog log_;
  SimCounters counters_;
};

NSystem init(const ModelSpec& spec, std::size_t n, std::uint64_t seed, SimOptions options = {});
std::vector<double> local_empirical(const NSystem& system, std::size_t i);
std::vector<double> global_empirical(const NSystem& system);

}  // namespace mfnet
