#include "mfnet/nsystem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "mfnet/errors.hpp"

namespace mfnet {

namespace {

struct NodeAtom {
  double s;
  std::uint32_t i;
  std::uint32_t y;
  double z;
};

}  // namespace

NSystem NSystem::init(const ModelSpec& spec, std::size_t n, std::uint64_t seed, SimOptions options) {
  if (n == 0) throw std::invalid_argument("NSystem::init: n must be >= 1");
  if (spec.num_edge_states() > 255) throw std::invalid_argument("NSystem: at most 255 edge states supported");
  if (spec.num_node_states() > 65535) throw std::invalid_argument("NSystem: at most 65535 node states supported");
  if (n > 65535) throw std::invalid_argument("NSystem: n is limited to 65535");
  NSystem sys;
  sys.spec_ = std::make_shared<const ModelSpec>(spec);
  sys.options_ = options;
  sys.n_ = n;
  sys.ny_ = spec.num_marks();
  sys.nx_ = spec.num_node_states();
  sys.ne_ = spec.num_edge_states();
  sys.beta_ = std::isnan(options.beta) ? spec.beta(n) : options.beta;
  if (!(sys.beta_ >= 0.0)) throw std::invalid_argument("NSystem::init: beta must be >= 0");

  sys.x_.resize(n);
  sys.xi_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = static_cast<std::uint32_t>(i + 1);
    sys.x_[i] = static_cast<std::uint16_t>(sample_index(spec.mu0, keyed_uniform(seed, StreamKind::NodeInit, id, 0)));
    for (std::size_t j = 0; j < n; ++j)
      sys.xi_[i * n + j] = static_cast<std::uint8_t>(
          sample_index(spec.theta0, keyed_uniform(seed, StreamKind::EdgeInit, id, static_cast<std::uint32_t>(j + 1))));
  }
  sys.build_tables();
  sys.rebuild_aggregates();

  const std::size_t logged = std::min(n, options.logged_nodes);
  sys.log_.nodes.resize(logged);
  for (std::size_t i = 0; i < logged; ++i) sys.log_.nodes[i].initial = spec.spaces.node.value(sys.x_[i]);
  return sys;
}

void NSystem::build_tables() {
  const auto& spec = *spec_;
  gx_.assign(nx_ * ne_ * ny_ * nx_, 0.0);
  for (std::size_t xt = 0; xt < nx_; ++xt)
    for (std::size_t xi = 0; xi < ne_; ++xi)
      for (std::size_t y = 0; y < ny_; ++y)
        for (std::size_t x = 0; x < nx_; ++x) gx_[((xt * ne_ + xi) * ny_ + y) * nx_ + x] = spec.gamma(y, x, xt, xi);

  edge_rate_.assign(spec.gamma_tilde.table().size(), 0.0);
  for (std::size_t k = 0; k < edge_rate_.size(); ++k) edge_rate_[k] = beta_ * spec.gamma_tilde.table()[k];

  node_target_.assign(nx_ * ny_, -1);
  edge_target_.assign(ne_ * ny_, -1);
  for (std::size_t y = 0; y < ny_; ++y) {
    for (std::size_t x = 0; x < nx_; ++x)
      if (auto t = spec.node_target(x, y)) node_target_[x * ny_ + y] = static_cast<int>(*t);
    for (std::size_t xi = 0; xi < ne_; ++xi)
      if (auto t = spec.edge_target(xi, y)) edge_target_[xi * ny_ + y] = static_cast<int>(*t);
  }
  delta_.assign(ne_ * ny_ * nx_, 0.0);
}

void NSystem::rebuild_aggregates() {
  const std::size_t row = ny_ * nx_;
  agg_.assign(n_ * row, 0.0);
  std::vector<std::size_t> counts(nx_ * ne_);
  for (std::size_t i = 0; i < n_; ++i) {
    std::fill(counts.begin(), counts.end(), 0);
    const std::uint8_t* edges = &xi_[i * n_];
    for (std::size_t j = 0; j < n_; ++j) ++counts[x_[j] * ne_ + edges[j]];
    double* a = &agg_[i * row];
    for (std::size_t pair = 0; pair < counts.size(); ++pair) {
      if (counts[pair] == 0) continue;
      const double c = static_cast<double>(counts[pair]);
      const double* g = &gx_[pair * row];
      for (std::size_t k = 0; k < row; ++k) a[k] += c * g[k];
    }
  }
}

double NSystem::aggregate_drift() const {
  const std::size_t row = ny_ * nx_;
  double worst = 0.0;
  std::vector<double> fresh(row);
  for (std::size_t i = 0; i < n_; ++i) {
    std::fill(fresh.begin(), fresh.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const double* g = &gx_[(x_[j] * ne_ + xi_[i * n_ + j]) * row];
      for (std::size_t k = 0; k < row; ++k) fresh[k] += g[k];
    }
    for (std::size_t k = 0; k < row; ++k)
      worst = std::max(worst, std::abs(fresh[k] - agg_[i * row + k]) / std::max(1.0, std::abs(fresh[k])));
  }
  return worst;
}

void NSystem::ensure_cursors(const StreamFamily& family) {
  if (family_) {
    if (family.seed != family_->seed || family.edge_ceiling != family_->edge_ceiling ||
        family.node_ceiling != family_->node_ceiling || family.horizon != family_->horizon)
      throw std::invalid_argument("NSystem::run: a different stream family was used on an earlier call");
    return;
  }
  if (family.rho.size() != ny_) throw std::invalid_argument("NSystem::run: stream family does not match the model");
  if (beta_ > family.beta_max * (1.0 + 1e-12))
    throw std::invalid_argument("NSystem::run: beta exceeds the stream family's beta_max");
  const double expected = family.expected_candidates(n_);
  if (expected > options_.event_budget) {
    std::ostringstream os;
    os << "expected candidate-event count " << expected << " for n=" << n_ << " exceeds budget "
       << options_.event_budget;
    throw BudgetError(os.str());
  }
  family_ = family;

  node_next_.resize(n_ * ny_);
  node_ord_.assign(n_ * ny_, 0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t y = 0; y < ny_; ++y)
      node_next_[i * ny_ + y] =
          family.node_process(static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>(y)).first_time();

  edge_next_.resize(n_ * n_ * ny_);
  edge_ord_.assign(n_ * n_ * ny_, 0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t y = 0; y < ny_; ++y)
        edge_next_[(i * n_ + j) * ny_ + y] =
            family
                .edge_process(static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>(j + 1),
                              static_cast<std::uint32_t>(y))
                .first_time();
}

void NSystem::catch_up_edge(std::size_t i, std::size_t j, double s, bool inclusive) {
  const double* next = &edge_next_[(i * n_ + j) * ny_];
  for (;;) {
    std::size_t best = 0;
    double bt = next[0];
    for (std::size_t y = 1; y < ny_; ++y)
      if (next[y] < bt) {
        bt = next[y];
        best = y;
      }
    if (inclusive ? !(bt <= s) : !(bt < s)) return;
    process_edge_atom(i, j, best, bt);
  }
}

void NSystem::process_edge_atom(std::size_t i, std::size_t j, std::size_t y, double s) {
  const std::size_t e = i * n_ + j;
  const std::size_t c = e * ny_ + y;
  const std::uint32_t k = edge_ord_[c];
  const MarkProcess proc(family_->seed,
                         StreamId::edge(static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>(j + 1)),
                         static_cast<std::uint32_t>(y), family_->rho[y] * family_->edge_ceiling[y],
                         family_->edge_ceiling[y]);
  const auto st = proc.step(k, s);
  edge_next_[c] = st.next_s;
  edge_ord_[c] = k + 1;
  ++counters_.edge_candidates;

  const std::size_t xi = xi_[e];
  const double rate = edge_rate_[((y * ne_ + xi) * nx_ + x_[i]) * nx_ + x_[j]];
  if (!(st.z <= rate)) return;
  const int target = edge_target_[xi * ny_ + y];
  if (target < 0) {
    std::ostringstream os;
    os << "edge (" << i + 1 << ',' << j + 1 << ") would leave the edge state space at t=" << s;
    throw ClosureError(os.str());
  }
  const std::size_t row = ny_ * nx_;
  const double* g_new = &gx_[(x_[j] * ne_ + static_cast<std::size_t>(target)) * row];
  const double* g_old = &gx_[(x_[j] * ne_ + xi) * row];
  double* a = &agg_[i * row];
  for (std::size_t q = 0; q < row; ++q) a[q] += g_new[q] - g_old[q];
  xi_[e] = static_cast<std::uint8_t>(target);
  ++counters_.edge_accepted;
  if (options_.log_edges)
    log_.edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), s,
                          spec_->spaces.edge.value(static_cast<std::size_t>(target))});
}

void NSystem::apply_node_jump(std::size_t i, std::size_t target, double s) {
  for (std::size_t j = 0; j < n_; ++j) catch_up_edge(j, i, s, false);
  const std::size_t row = ny_ * nx_;
  const std::size_t old = x_[i];
  for (std::size_t xi = 0; xi < ne_; ++xi) {
    const double* g_new = &gx_[(target * ne_ + xi) * row];
    const double* g_old = &gx_[(old * ne_ + xi) * row];
    for (std::size_t q = 0; q < row; ++q) delta_[xi * row + q] = g_new[q] - g_old[q];
  }
  for (std::size_t j = 0; j < n_; ++j) {
    const double* d = &delta_[xi_[j * n_ + i] * row];
    double* a = &agg_[j * row];
    for (std::size_t q = 0; q < row; ++q) a[q] += d[q];
  }
  x_[i] = static_cast<std::uint16_t>(target);
  ++counters_.node_accepted;
  if (i < log_.nodes.size()) log_.nodes[i].jumps.emplace_back(s, spec_->spaces.node.value(target));
}

const TrajectoryLog& NSystem::run(const StreamFamily& family, double until) {
  const double horizon = spec_->horizon;
  if (!(until >= t_ && until <= horizon * (1.0 + 1e-12)))
    throw std::out_of_range("NSystem::run: need current time <= until <= T");
  until = std::min(until, horizon);
  ensure_cursors(family);

  std::vector<NodeAtom> atoms;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t y = 0; y < ny_; ++y) {
      const std::size_t c = i * ny_ + y;
      if (!(node_next_[c] <= until)) continue;
      const auto proc = family_->node_process(static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>(y));
      while (node_next_[c] <= until) {
        const auto st = proc.step(node_ord_[c], node_next_[c]);
        atoms.push_back({node_next_[c], static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(y), st.z});
        node_next_[c] = st.next_s;
        ++node_ord_[c];
      }
    }
  std::sort(atoms.begin(), atoms.end(), [](const NodeAtom& a, const NodeAtom& b) {
    return std::tie(a.s, a.i, a.y, a.z) < std::tie(b.s, b.i, b.y, b.z);
  });

  const double inv_n = 1.0 / static_cast<double>(n_);
  for (const auto& atom : atoms) {
    ++counters_.node_candidates;
    for (std::size_t j = 0; j < n_; ++j) catch_up_edge(atom.i, j, atom.s, false);
    const std::size_t xi = x_[atom.i];
    const double rate = agg_[(atom.i * ny_ + atom.y) * nx_ + xi] * inv_n;
    if (!(atom.z <= rate)) continue;
    const int target = node_target_[xi * ny_ + atom.y];
    if (target < 0) {
      std::ostringstream os;
      os << "node " << atom.i + 1 << " would leave the node state space at t=" << atom.s;
      throw ClosureError(os.str());
    }
    apply_node_jump(atom.i, static_cast<std::size_t>(target), atom.s);
    if (options_.verify_aggregates && aggregate_drift() > 1e-9)
      throw NumericalError("aggregate drift after node event at t=" + std::to_string(atom.s));
  }

  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) catch_up_edge(i, j, until, true);
  if (options_.verify_aggregates && aggregate_drift() > 1e-9)
    throw NumericalError("aggregate drift after edge catch-up");
  t_ = until;
  return log_;
}

int NSystem::node_state(std::size_t i) const { return spec_->spaces.node.value(x_[i]); }

int NSystem::edge_state(std::size_t i, std::size_t j) const { return spec_->spaces.edge.value(xi_[i * n_ + j]); }

std::vector<double> NSystem::local_empirical(std::size_t i) const {
  std::vector<double> nu(nx_ * ne_, 0.0);
  const double w = 1.0 / static_cast<double>(n_);
  for (std::size_t j = 0; j < n_; ++j) nu[x_[j] * ne_ + xi_[i * n_ + j]] += w;
  return nu;
}

std::vector<double> NSystem::global_empirical() const {
  std::vector<double> mu(nx_, 0.0);
  const double w = 1.0 / static_cast<double>(n_);
  for (std::size_t j = 0; j < n_; ++j) mu[x_[j]] += w;
  return mu;
}

NSystem init(const ModelSpec& spec, std::size_t n, std::uint64_t seed, SimOptions options) {
  return NSystem::init(spec, n, seed, options);
}

std::vector<double> local_empirical(const NSystem& system, std::size_t i) { return system.local_empirical(i); }

std::vector<double> global_empirical(const NSystem& system) { return system.global_empirical(); }

}  // namespace mfnet
