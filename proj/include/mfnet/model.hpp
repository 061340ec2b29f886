#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfnet {

/// Ordered finite set of integers with O(1) value -> index lookup.
class IndexedStates {
 public:
  IndexedStates() = default;
  explicit IndexedStates(std::vector<int> values);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  int value(std::size_t index) const { return values_[index]; }
  const std::vector<int>& values() const { return values_; }

  std::optional<std::size_t> index_of(int value) const;
  bool contains(int value) const { return index_of(value).has_value(); }

  /// True when the set equals its own negation.
  bool symmetric() const;
  bool has_duplicates() const;

 private:
  std::vector<int> values_;
  int min_ = 0;
  std::vector<int> lookup_;
};

struct StateSpaces {
  IndexedStates node;   // S_x
  IndexedStates edge;   // S_xi
  IndexedStates marks;  // Y, support of rho
};

// gamma(y, x, x~, xi~), dense, row-major in that order.
class NodeKernel {
 public:
  NodeKernel() = default;
  NodeKernel(std::size_t marks, std::size_t nodes, std::size_t edges);

  double operator()(std::size_t y, std::size_t x, std::size_t xt, std::size_t xi) const {
    return table_[offset(y, x, xt, xi)];
  }
  double& at(std::size_t y, std::size_t x, std::size_t xt, std::size_t xi) {
    return table_[offset(y, x, xt, xi)];
  }
  std::size_t marks() const { return marks_; }
  std::size_t nodes() const { return nodes_; }
  std::size_t edges() const { return edges_; }
  const std::vector<double>& table() const { return table_; }

  /// gamma_y, one entry per mark.
  std::vector<double> envelope;

 private:
  std::size_t offset(std::size_t y, std::size_t x, std::size_t xt, std::size_t xi) const {
    return ((y * nodes_ + x) * nodes_ + xt) * edges_ + xi;
  }
  std::size_t marks_ = 0, nodes_ = 0, edges_ = 0;
  std::vector<double> table_;
};

// Gamma~(y, xi~, x, x~): rate of an edge in color xi~ jumping by y, given endpoints (x, x~).
class EdgeKernel {
 public:
  EdgeKernel() = default;
  EdgeKernel(std::size_t marks, std::size_t nodes, std::size_t edges);

  double operator()(std::size_t y, std::size_t xi, std::size_t x, std::size_t xt) const {
    return table_[offset(y, xi, x, xt)];
  }
  double& at(std::size_t y, std::size_t xi, std::size_t x, std::size_t xt) {
    return table_[offset(y, xi, x, xt)];
  }
  std::size_t marks() const { return marks_; }
  std::size_t nodes() const { return nodes_; }
  std::size_t edges() const { return edges_; }
  const std::vector<double>& table() const { return table_; }

 private:
  std::size_t offset(std::size_t y, std::size_t xi, std::size_t x, std::size_t xt) const {
    return ((y * edges_ + xi) * nodes_ + x) * nodes_ + xt;
  }
  std::size_t marks_ = 0, nodes_ = 0, edges_ = 0;
  std::vector<double> table_;
};

/// beta(n) = scale * n^power; power 0 gives a constant schedule.
struct BetaSchedule {
  double scale = 1.0;
  double power = 0.0;

  double operator()(std::size_t n) const;
  bool is_constant() const { return power == 0.0; }
  static BetaSchedule constant(double beta) { return {beta, 0.0}; }
};

/// Parameters of the separable kernel c0 b0(x) + c1 b1(x~) + c2 b2(xi~) + c3.
struct CltExample {
  std::vector<double> c0, c1, c2, c3;  // per mark
  std::vector<double> b0, b1;          // per node state
  std::vector<double> b2;              // per edge state
  double epsilon = 1.0;

  /// Unrestricted separable value at the given indices.
  double rate(std::size_t y, std::size_t x, std::size_t xt, std::size_t xi) const {
    return c0[y] * b0[x] + c1[y] * b1[xt] + c2[y] * b2[xi] + c3[y];
  }
};

struct ModelSpec {
  StateSpaces spaces;
  std::vector<double> rho;  // per mark
  NodeKernel gamma;
  EdgeKernel gamma_tilde;
  BetaSchedule beta;
  double horizon = 1.0;
  std::vector<double> mu0;     // on S_x
  std::vector<double> theta0;  // on S_xi
  std::optional<CltExample> clt;

  std::size_t num_marks() const { return spaces.marks.size(); }
  std::size_t num_node_states() const { return spaces.node.size(); }
  std::size_t num_edge_states() const { return spaces.edge.size(); }

  /// max over (x, x~, xi~) of gamma(y, .); thinning ceiling of node streams.
  double node_rate_max(std::size_t y) const;
  /// max over (xi~, x, x~) of Gamma~(y, .); edge ceilings are beta_max times this.
  double edge_rate_max(std::size_t y) const;
  /// C_gamma = sum_y |y| gamma_y rho(y).
  double c_gamma() const;
  /// Target state index of a jump by mark y from node state x, if it stays in S_x.
  std::optional<std::size_t> node_target(std::size_t x, std::size_t y) const;
  std::optional<std::size_t> edge_target(std::size_t xi, std::size_t y) const;
};

struct ValidationIssue {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  bool has(const std::string& code) const;
  std::string summary() const;
};

ValidationReport validate(const ModelSpec& spec);

/// Gamma(y, x, nu) = sum gamma(y, x, x~, xi~) nu(x~, xi~). `nu` is row-major over (x~, xi~).
double aggregate_rate(const ModelSpec& spec, std::size_t y, std::size_t x, std::span<const double> nu);

/// Fill the envelope with per-mark maxima over both kernels.
void set_tight_envelope(ModelSpec& spec);

/// Build the separable node kernel from `spec.clt`. Jumps leaving S_x get rate 0.
void apply_clt_kernel(ModelSpec& spec);

}  // namespace mfnet
