#include "mfnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mfnet {

IndexedStates::IndexedStates(std::vector<int> values) : values_(std::move(values)) {
  if (values_.empty()) return;
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  min_ = *lo;
  lookup_.assign(static_cast<std::size_t>(static_cast<long long>(*hi) - *lo + 1), -1);
  for (std::size_t k = 0; k < values_.size(); ++k) {
    int& slot = lookup_[static_cast<std::size_t>(values_[k] - min_)];
    if (slot < 0) slot = static_cast<int>(k);
  }
}

std::optional<std::size_t> IndexedStates::index_of(int value) const {
  const long long off = static_cast<long long>(value) - min_;
  if (off < 0 || off >= static_cast<long long>(lookup_.size())) return std::nullopt;
  const int slot = lookup_[static_cast<std::size_t>(off)];
  if (slot < 0) return std::nullopt;
  return static_cast<std::size_t>(slot);
}

bool IndexedStates::symmetric() const {
  return std::all_of(values_.begin(), values_.end(), [this](int v) { return contains(-v); });
}

bool IndexedStates::has_duplicates() const {
  std::vector<int> sorted = values_;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

NodeKernel::NodeKernel(std::size_t marks, std::size_t nodes, std::size_t edges)
    : envelope(marks, 0.0),
      marks_(marks),
      nodes_(nodes),
      edges_(edges),
      table_(marks * nodes * nodes * edges, 0.0) {}

EdgeKernel::EdgeKernel(std::size_t marks, std::size_t nodes, std::size_t edges)
    : marks_(marks), nodes_(nodes), edges_(edges), table_(marks * edges * nodes * nodes, 0.0) {}

double BetaSchedule::operator()(std::size_t n) const {
  if (power == 0.0) return scale;
  return scale * std::pow(static_cast<double>(n), power);
}

double ModelSpec::node_rate_max(std::size_t y) const {
  double best = 0.0;
  const std::size_t nx = num_node_states(), ne = num_edge_states();
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t xt = 0; xt < nx; ++xt)
      for (std::size_t xi = 0; xi < ne; ++xi) best = std::max(best, gamma(y, x, xt, xi));
  return best;
}

double ModelSpec::edge_rate_max(std::size_t y) const {
  double best = 0.0;
  const std::size_t nx = num_node_states(), ne = num_edge_states();
  for (std::size_t xi = 0; xi < ne; ++xi)
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t xt = 0; xt < nx; ++xt) best = std::max(best, gamma_tilde(y, xi, x, xt));
  return best;
}

double ModelSpec::c_gamma() const {
  double total = 0.0;
  for (std::size_t y = 0; y < num_marks(); ++y)
    total += std::abs(spaces.marks.value(y)) * gamma.envelope[y] * rho[y];
  return total;
}

std::optional<std::size_t> ModelSpec::node_target(std::size_t x, std::size_t y) const {
  return spaces.node.index_of(spaces.node.value(x) + spaces.marks.value(y));
}

std::optional<std::size_t> ModelSpec::edge_target(std::size_t xi, std::size_t y) const {
  return spaces.edge.index_of(spaces.edge.value(xi) + spaces.marks.value(y));
}

bool ValidationReport::has(const std::string& code) const {
  return std::any_of(issues.begin(), issues.end(), [&](const ValidationIssue& i) { return i.code == code; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& issue : issues) os << issue.code << ": " << issue.message << '\n';
  return os.str();
}

namespace {

constexpr double kBoundTol = 1e-12;
constexpr std::size_t kMaxPerCode = 20;

class IssueSink {
 public:
  explicit IssueSink(ValidationReport& report) : report_(report) {}
  ~IssueSink() {
    for (const auto& [code, count] : counts_)
      if (count > kMaxPerCode)
        report_.issues.push_back({code, "... and " + std::to_string(count - kMaxPerCode) + " more"});
  }
  void add(const std::string& code, const std::string& message) {
    if (++counts_[code] <= kMaxPerCode) report_.issues.push_back({code, message});
  }

 private:
  ValidationReport& report_;
  std::map<std::string, std::size_t> counts_;
};

std::string tuple4(int a, int b, int c, int d) {
  std::ostringstream os;
  os << '(' << a << ',' << b << ',' << c << ',' << d << ')';
  return os.str();
}

void check_simplex(IssueSink& sink, const std::string& code, const std::vector<double>& p, std::size_t size) {
  if (p.size() != size) {
    sink.add(code, "expected " + std::to_string(size) + " entries, got " + std::to_string(p.size()));
    return;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!(p[k] >= 0.0)) sink.add(code, "negative entry at index " + std::to_string(k));
    sum += p[k];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "entries sum to " << sum;
    sink.add(code, os.str());
  }
}

bool is_even(const std::vector<double>& f, const IndexedStates& s) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto m = s.index_of(-s.value(k));
    if (!m || f[k] != f[*m]) return false;
  }
  return true;
}

bool is_odd(const std::vector<double>& f, const IndexedStates& s) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto m = s.index_of(-s.value(k));
    if (!m || f[k] != -f[*m]) return false;
  }
  return true;
}

void validate_clt(const ModelSpec& spec, IssueSink& sink) {
  const CltExample& c = *spec.clt;
  const auto& sp = spec.spaces;
  const std::size_t ny = sp.marks.size(), nx = sp.node.size(), ne = sp.edge.size();
  if (!(c.epsilon > 0.0 && c.epsilon <= 1.0)) {
    sink.add("clt_epsilon", "epsilon must lie in (0,1], got " + std::to_string(c.epsilon));
    return;
  }
  if (c.c0.size() != ny || c.c1.size() != ny || c.c2.size() != ny || c.c3.size() != ny ||
      c.b0.size() != nx || c.b1.size() != nx || c.b2.size() != ne) {
    sink.add("clt_shape", "coefficient vectors do not match the state spaces");
    return;
  }
  if (!sp.node.symmetric()) sink.add("clt_space_symmetry", "node states are not symmetric about 0");
  if (!sp.edge.symmetric()) sink.add("clt_space_symmetry", "edge states are not symmetric about 0");
  if (!sp.marks.symmetric()) sink.add("clt_space_symmetry", "marks are not symmetric about 0");
  if (!sp.node.symmetric() || !sp.edge.symmetric() || !sp.marks.symmetric()) return;

  if (!is_even(spec.rho, sp.marks)) sink.add("clt_parity", "rho is not even");
  if (!is_even(c.c0, sp.marks)) sink.add("clt_parity", "c0 is not even");
  if (!is_even(c.c3, sp.marks)) sink.add("clt_parity", "c3 is not even");
  if (!is_even(c.b0, sp.node)) sink.add("clt_parity", "b0 is not even");
  if (!is_odd(c.b1, sp.node)) sink.add("clt_parity", "b1 is not odd");
  if (!is_odd(c.b2, sp.edge)) sink.add("clt_parity", "b2 is not odd");

  const auto zx = sp.node.index_of(0);
  const auto ze = sp.edge.index_of(0);
  if (!zx || spec.mu0.size() != nx || spec.mu0[*zx] != 1.0)
    sink.add("clt_initial", "initial node law must be the point mass at 0");
  if (!ze || spec.theta0.size() != ne || spec.theta0[*ze] != 1.0)
    sink.add("clt_initial", "initial edge law must be the point mass at 0");

  for (std::size_t y = 0; y < ny; ++y) {
    const std::size_t my = *sp.marks.index_of(-sp.marks.value(y));
    for (std::size_t x = 0; x < nx; ++x) {
      const bool admissible = spec.node_target(x, y).has_value();
      for (std::size_t xt = 0; xt < nx; ++xt)
        for (std::size_t xi = 0; xi < ne; ++xi) {
          const double g = spec.gamma(y, x, xt, xi);
          const std::string where = tuple4(sp.marks.value(y), sp.node.value(x), sp.node.value(xt), sp.edge.value(xi));
          if (!admissible) continue;
          if (std::abs(g - c.rate(y, x, xt, xi)) > 1e-12)
            sink.add("clt_kernel_mismatch", "gamma" + where + " differs from the separable form");
          if (g < c.epsilon - kBoundTol || g > 1.0 / c.epsilon + kBoundTol)
            sink.add("clt_bounds", "gamma" + where + " = " + std::to_string(g) + " outside [eps, 1/eps]");
        }
    }
    // Reflection symmetry of the edge chain: Gamma~(y, xi, x, x~) = Gamma~(-y, -xi, x, x~).
    for (std::size_t xi = 0; xi < ne; ++xi) {
      const std::size_t mxi = *sp.edge.index_of(-sp.edge.value(xi));
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t xt = 0; xt < nx; ++xt)
          if (spec.gamma_tilde(y, xi, x, xt) != spec.gamma_tilde(my, mxi, x, xt))
            sink.add("clt_edge_reflection",
                     "gamma_tilde" + tuple4(sp.marks.value(y), sp.edge.value(xi), sp.node.value(x), sp.node.value(xt)) +
                         " breaks the reflection symmetry");
    }
  }
}

}  // namespace

ValidationReport validate(const ModelSpec& spec) {
  ValidationReport report;
  {
    IssueSink sink(report);
    const auto& sp = spec.spaces;
    if (sp.node.empty()) sink.add("empty_space", "node state space is empty");
    if (sp.edge.empty()) sink.add("empty_space", "edge state space is empty");
    if (sp.marks.empty()) sink.add("empty_space", "mark set is empty");
    if (sp.node.has_duplicates()) sink.add("duplicate_state", "node states are not distinct");
    if (sp.edge.has_duplicates()) sink.add("duplicate_state", "edge states are not distinct");
    if (sp.marks.has_duplicates()) sink.add("duplicate_state", "marks are not distinct");
    for (int y : sp.marks.values())
      if (y == 0) sink.add("zero_mark", "marks must be nonzero");
    if (!report.issues.empty()) return report;

    const std::size_t ny = sp.marks.size(), nx = sp.node.size(), ne = sp.edge.size();
    if (spec.rho.size() != ny) {
      sink.add("rho_shape", "rho must have one mass per mark");
      return report;
    }
    for (std::size_t y = 0; y < ny; ++y)
      if (!(spec.rho[y] > 0.0) || !std::isfinite(spec.rho[y]))
        sink.add("rho_nonpositive", "rho(" + std::to_string(sp.marks.value(y)) + ") must be positive and finite");

    if (spec.gamma.marks() != ny || spec.gamma.nodes() != nx || spec.gamma.edges() != ne ||
        spec.gamma.envelope.size() != ny || spec.gamma_tilde.marks() != ny || spec.gamma_tilde.nodes() != nx ||
        spec.gamma_tilde.edges() != ne) {
      sink.add("kernel_shape", "kernel tables do not match the state spaces");
      return report;
    }

    for (std::size_t y = 0; y < ny; ++y) {
      const double env = spec.gamma.envelope[y];
      if (!(env >= 0.0) || !std::isfinite(env))
        sink.add("envelope", "envelope(" + std::to_string(sp.marks.value(y)) + ") must be finite and >= 0");
      for (std::size_t x = 0; x < nx; ++x) {
        const bool admissible = spec.node_target(x, y).has_value();
        for (std::size_t xt = 0; xt < nx; ++xt)
          for (std::size_t xi = 0; xi < ne; ++xi) {
            const double g = spec.gamma(y, x, xt, xi);
            const auto where = tuple4(sp.marks.value(y), sp.node.value(x), sp.node.value(xt), sp.edge.value(xi));
            if (!(g >= 0.0)) sink.add("gamma_negative", "gamma" + where + " = " + std::to_string(g));
            if (g > env * (1.0 + kBoundTol) + kBoundTol)
              sink.add("gamma_envelope",
                       "gamma" + where + " = " + std::to_string(g) + " exceeds envelope " + std::to_string(env));
            if (g > 0.0 && !admissible)
              sink.add("node_closure", "gamma" + where + " > 0 but the jump leaves the node state space");
          }
      }
      for (std::size_t xi = 0; xi < ne; ++xi) {
        const bool admissible = spec.edge_target(xi, y).has_value();
        for (std::size_t x = 0; x < nx; ++x)
          for (std::size_t xt = 0; xt < nx; ++xt) {
            const double g = spec.gamma_tilde(y, xi, x, xt);
            const auto where = tuple4(sp.marks.value(y), sp.edge.value(xi), sp.node.value(x), sp.node.value(xt));
            if (!(g >= 0.0)) sink.add("gamma_tilde_negative", "gamma_tilde" + where + " = " + std::to_string(g));
            if (g > env * (1.0 + kBoundTol) + kBoundTol)
              sink.add("gamma_tilde_envelope",
                       "gamma_tilde" + where + " = " + std::to_string(g) + " exceeds envelope " + std::to_string(env));
            if (g > 0.0 && !admissible)
              sink.add("edge_closure", "gamma_tilde" + where + " > 0 but the jump leaves the edge state space");
          }
      }
    }

    check_simplex(sink, "mu0_simplex", spec.mu0, nx);
    check_simplex(sink, "theta0_simplex", spec.theta0, ne);
    if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon)) sink.add("horizon", "T must be positive and finite");
    if (!(spec.beta.scale >= 0.0) || !std::isfinite(spec.beta.power))
      sink.add("beta_negative", "beta schedule must be nonnegative");

    if (spec.clt) validate_clt(spec, sink);
  }
  return report;
}

double aggregate_rate(const ModelSpec& spec, std::size_t y, std::size_t x, std::span<const double> nu) {
  const std::size_t nx = spec.num_node_states(), ne = spec.num_edge_states();
  if (nu.size() != nx * ne) throw std::invalid_argument("aggregate_rate: nu has the wrong size");
  double total = 0.0, mass = 0.0;
  for (std::size_t xt = 0; xt < nx; ++xt)
    for (std::size_t xi = 0; xi < ne; ++xi) {
      const double w = nu[xt * ne + xi];
      if (w < 0.0) throw std::invalid_argument("aggregate_rate: nu has a negative entry");
      mass += w;
      total += spec.gamma(y, x, xt, xi) * w;
    }
  if (std::abs(mass - 1.0) > 1e-9) throw std::invalid_argument("aggregate_rate: nu does not sum to 1");
  return total;
}

void set_tight_envelope(ModelSpec& spec) {
  spec.gamma.envelope.assign(spec.num_marks(), 0.0);
  for (std::size_t y = 0; y < spec.num_marks(); ++y)
    spec.gamma.envelope[y] = std::max(spec.node_rate_max(y), spec.edge_rate_max(y));
}

void apply_clt_kernel(ModelSpec& spec) {
  if (!spec.clt) throw std::invalid_argument("apply_clt_kernel: model has no clt_example block");
  const auto& c = *spec.clt;
  const std::size_t ny = spec.num_marks(), nx = spec.num_node_states(), ne = spec.num_edge_states();
  if (c.c0.size() != ny || c.c1.size() != ny || c.c2.size() != ny || c.c3.size() != ny || c.b0.size() != nx ||
      c.b1.size() != nx || c.b2.size() != ne)
    throw std::invalid_argument("apply_clt_kernel: coefficient vectors do not match the state spaces");
  NodeKernel kernel(ny, nx, ne);
  const bool keep_envelope = spec.gamma.envelope.size() == ny;
  if (keep_envelope) kernel.envelope = spec.gamma.envelope;
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      if (!spec.node_target(x, y)) continue;
      for (std::size_t xt = 0; xt < nx; ++xt)
        for (std::size_t xi = 0; xi < ne; ++xi) kernel.at(y, x, xt, xi) = c.rate(y, x, xt, xi);
    }
  spec.gamma = std::move(kernel);
  if (!keep_envelope) set_tight_envelope(spec);
}

}  // namespace mfnet
