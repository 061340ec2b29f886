#include "mfnet/limits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "mfnet/errors.hpp"

namespace mfnet {

namespace {

using Field = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

constexpr double kNegTol = 1e-8;

void check_grid(std::span<const double> grid, double horizon) {
  if (grid.empty() || grid.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw std::invalid_argument("time grid must be strictly increasing");
  if (grid.back() > horizon * (1.0 + 1e-12)) throw std::invalid_argument("time grid exceeds the horizon");
}

// Fixed-step RK4 reporting the state at every grid point.
std::vector<std::vector<double>> rk4(const Field& f, std::vector<double> y, std::span<const double> grid,
                                     double horizon, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("OdeOptions.steps must be >= 1");
  const double h_max = horizon / static_cast<double>(steps);
  const std::size_t d = y.size();
  std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
  std::vector<std::vector<double>> out;
  out.reserve(grid.size());
  out.push_back(y);
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double span = grid[g] - grid[g - 1];
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / h_max - 1e-9)));
    const double h = span / static_cast<double>(m);
    for (std::size_t s = 0; s < m; ++s) {
      const double t = grid[g - 1] + static_cast<double>(s) * h;
      f(t, y, k1);
      for (std::size_t q = 0; q < d; ++q) tmp[q] = y[q] + 0.5 * h * k1[q];
      f(t + 0.5 * h, tmp, k2);
      for (std::size_t q = 0; q < d; ++q) tmp[q] = y[q] + 0.5 * h * k2[q];
      f(t + 0.5 * h, tmp, k3);
      for (std::size_t q = 0; q < d; ++q) tmp[q] = y[q] + h * k3[q];
      f(t + h, tmp, k4);
      for (std::size_t q = 0; q < d; ++q) {
        y[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
        if (y[q] < 0.0) {
          if (y[q] < -kNegTol) {
            std::ostringstream os;
            os << "forward equation left the simplex (entry " << y[q] << " at t=" << t + h
               << "); retry with step <= " << h / 4.0;
            throw NumericalError(os.str());
          }
          y[q] = 0.0;
        }
      }
    }
    out.push_back(y);
  }
  return out;
}

MarginalLaw slice(const std::vector<std::vector<double>>& states, std::span<const double> grid, std::size_t from,
                  std::size_t count) {
  MarginalLaw law;
  law.grid.assign(grid.begin(), grid.end());
  for (const auto& s : states) law.p.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(from),
                                                  s.begin() + static_cast<std::ptrdiff_t>(from + count));
  return law;
}

// Accumulate the node-chain drift for per-(y, x) rates r(y, x).
void node_flow(const ModelSpec& spec, const std::vector<double>& rate, const std::vector<double>& p,
               std::vector<double>& dp) {
  const std::size_t nx = spec.num_node_states(), ny = spec.num_marks();
  std::fill(dp.begin(), dp.begin() + static_cast<std::ptrdiff_t>(nx), 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      const double r = rate[y * nx + x];
      if (r == 0.0) continue;
      const auto target = spec.node_target(x, y);
      if (!target) throw ClosureError("forward equation: positive rate out of the node state space");
      dp[x] -= p[x] * r;
      dp[*target] += p[x] * r;
    }
}

// Interpolation of a law at t into `out`.
void law_at(const MarginalLaw& law, double t, std::vector<double>& out) {
  const auto& g = law.grid;
  if (t <= g.front()) {
    out = law.p.front();
    return;
  }
  if (t >= g.back()) {
    out = law.p.back();
    return;
  }
  const auto k = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), t) - g.begin()) - 1;
  const double w = (t - g[k]) / (g[k + 1] - g[k]);
  out.resize(law.p[k].size());
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = (1.0 - w) * law.p[k][q] + w * law.p[k + 1][q];
}

// Thinning loop shared by both limit samplers. `rate(y, x, t)` is the node rate.
template <typename Rate>
Path thin_path(const ModelSpec& spec, const PrmStream& stream, std::size_t x0, Rate&& rate) {
  Path path;
  path.initial = spec.spaces.node.value(x0);
  std::size_t x = x0;
  for (const auto& e : stream.events()) {
    const double r = rate(e.mark, x, e.s);
    if (!thin(e, r, stream.ceiling()[e.mark])) continue;
    const auto target = spec.node_target(x, e.mark);
    if (!target) {
      std::ostringstream os;
      os << "limit particle " << stream.id().i << " would leave the node state space at t=" << e.s;
      throw ClosureError(os.str());
    }
    x = *target;
    path.jumps.emplace_back(e.s, spec.spaces.node.value(x));
  }
  return path;
}

void write_law_row(std::ostream& out, double t, const std::vector<double>& p) {
  out << t;
  for (double v : p) out << ',' << v;
  out << '\n';
}

}  // namespace

std::vector<double> MarginalLaw::at(double t) const {
  std::vector<double> out;
  law_at(*this, t, out);
  return out;
}

void MarginalLaw::write_csv(const std::string& path, const IndexedStates& states) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.imbue(std::locale::classic());
  out << std::setprecision(17);
  out << "t";
  for (int v : states.values()) out << ",p_" << v;
  out << '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) write_law_row(out, grid[k], p[k]);
}

void InvariantMeasureMap::write_csv(const std::string& path, const ModelSpec& spec) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.imbue(std::locale::classic());
  out << std::setprecision(17) << "x,x_tilde,xi,q\n";
  for (std::size_t x = 0; x < nodes; ++x)
    for (std::size_t xt = 0; xt < nodes; ++xt)
      for (std::size_t xi = 0; xi < edges; ++xi)
        out << spec.spaces.node.value(x) << ',' << spec.spaces.node.value(xt) << ',' << spec.spaces.edge.value(xi)
            << ',' << (*this)(x, xt, xi) << '\n';
}

std::vector<double> uniform_grid(double horizon, std::size_t intervals) {
  if (intervals == 0 || !(horizon > 0.0)) throw std::invalid_argument("uniform_grid: need T > 0 and >= 1 interval");
  std::vector<double> g(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k)
    g[k] = horizon * static_cast<double>(k) / static_cast<double>(intervals);
  g.back() = horizon;
  return g;
}

Eigen::MatrixXd edge_generator(const ModelSpec& spec, std::size_t x, std::size_t xt) {
  const std::size_t ne = spec.num_edge_states();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ne), static_cast<Eigen::Index>(ne));
  for (std::size_t xi = 0; xi < ne; ++xi)
    for (std::size_t y = 0; y < spec.num_marks(); ++y) {
      const double r = spec.rho[y] * spec.gamma_tilde(y, xi, x, xt);
      if (r == 0.0) continue;
      const auto target = spec.edge_target(xi, y);
      if (!target) throw ClosureError("edge_generator: positive rate out of the edge state space");
      R(static_cast<Eigen::Index>(xi), static_cast<Eigen::Index>(*target)) += r;
      R(static_cast<Eigen::Index>(xi), static_cast<Eigen::Index>(xi)) -= r;
    }
  return R;
}

std::vector<double> stationary_distribution(const Eigen::MatrixXd& R) {
  const auto m = static_cast<std::size_t>(R.rows());
  if (m == 0 || R.cols() != R.rows()) throw std::invalid_argument("stationary_distribution: need a square generator");

  // Reachability closure of the support graph.
  std::vector<char> reach(m * m, 0);
  for (std::size_t a = 0; a < m; ++a) {
    reach[a * m + a] = 1;
    for (std::size_t b = 0; b < m; ++b)
      if (a != b && R(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) > 0.0) reach[a * m + b] = 1;
  }
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t a = 0; a < m; ++a)
      if (reach[a * m + k])
        for (std::size_t b = 0; b < m; ++b)
          if (reach[k * m + b]) reach[a * m + b] = 1;

  std::vector<int> cls(m, -1);
  std::vector<std::vector<std::size_t>> classes;
  for (std::size_t a = 0; a < m; ++a) {
    if (cls[a] >= 0) continue;
    classes.emplace_back();
    for (std::size_t b = a; b < m; ++b)
      if (reach[a * m + b] && reach[b * m + a]) {
        cls[b] = static_cast<int>(classes.size() - 1);
        classes.back().push_back(b);
      }
  }
  std::size_t closed = 0;
  for (const auto& c : classes) {
    bool leaves = false;
    for (std::size_t a : c)
      for (std::size_t b = 0; b < m; ++b)
        if (reach[a * m + b] && cls[b] != cls[a]) leaves = true;
    if (!leaves) ++closed;
  }
  if (closed != 1) {
    std::ostringstream os;
    os << "edge chain has " << closed << " closed communicating classes; classes (state indices):";
    for (const auto& c : classes) {
      os << " {";
      for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
      os << '}';
    }
    throw NumericalError(os.str());
  }

  Eigen::MatrixXd A = R.transpose();
  A.row(static_cast<Eigen::Index>(m - 1)).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  b(static_cast<Eigen::Index>(m - 1)) = 1.0;
  const Eigen::VectorXd pi = A.fullPivLu().solve(b);
  std::vector<double> out(m);
  for (std::size_t k = 0; k < m; ++k) out[k] = std::max(0.0, pi(static_cast<Eigen::Index>(k)));
  double total = 0.0;
  for (double v : out) total += v;
  for (double& v : out) v /= total;
  const double scale = std::max(1.0, R.cwiseAbs().maxCoeff());
  if (stationarity_residual(R, out) > 1e-10 * scale)
    throw NumericalError("stationary_distribution: residual above tolerance");
  return out;
}

double stationarity_residual(const Eigen::MatrixXd& R, std::span<const double> pi) {
  double worst = 0.0;
  for (Eigen::Index col = 0; col < R.cols(); ++col) {
    double s = 0.0;
    for (Eigen::Index row = 0; row < R.rows(); ++row) s += pi[static_cast<std::size_t>(row)] * R(row, col);
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

std::vector<double> invariant_measure(const ModelSpec& spec, std::size_t x, std::size_t xt) {
  return stationary_distribution(edge_generator(spec, x, xt));
}

InvariantMeasureMap invariant_map(const ModelSpec& spec) {
  InvariantMeasureMap Q;
  Q.nodes = spec.num_node_states();
  Q.edges = spec.num_edge_states();
  Q.q.reserve(Q.nodes * Q.nodes * Q.edges);
  for (std::size_t x = 0; x < Q.nodes; ++x)
    for (std::size_t xt = 0; xt < Q.nodes; ++xt) {
      const auto pi = invariant_measure(spec, x, xt);
      Q.q.insert(Q.q.end(), pi.begin(), pi.end());
    }
  return Q;
}

MarginalLaw forward_linear(const Eigen::MatrixXd& R, std::span<const double> p0, std::span<const double> grid,
                           OdeOptions options) {
  const auto m = static_cast<std::size_t>(R.rows());
  if (p0.size() != m) throw std::invalid_argument("forward_linear: size mismatch");
  check_grid(grid, grid.back());
  const Field f = [&](double, const std::vector<double>& p, std::vector<double>& dp) {
    for (std::size_t col = 0; col < m; ++col) {
      double s = 0.0;
      for (std::size_t row = 0; row < m; ++row)
        s += p[row] * R(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
      dp[col] = s;
    }
  };
  const auto states = rk4(f, {p0.begin(), p0.end()}, grid, grid.back(), options.steps);
  return slice(states, grid, 0, m);
}

MarginalLaw forward_equation_accel(const ModelSpec& spec, const InvariantMeasureMap& Q, std::span<const double> grid,
                                   OdeOptions options) {
  check_grid(grid, spec.horizon);
  const std::size_t nx = spec.num_node_states(), ny = spec.num_marks(), ne = spec.num_edge_states();
  // G[(y * nx + x) * nx + xt] = rho(y) sum_xi gamma(y, x, xt, xi) Q(x, xt, xi)
  std::vector<double> G(ny * nx * nx, 0.0);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t xt = 0; xt < nx; ++xt) {
        double s = 0.0;
        for (std::size_t xi = 0; xi < ne; ++xi) s += spec.gamma(y, x, xt, xi) * Q(x, xt, xi);
        G[(y * nx + x) * nx + xt] = spec.rho[y] * s;
      }
  std::vector<double> rate(ny * nx);
  const Field f = [&](double, const std::vector<double>& p, std::vector<double>& dp) {
    for (std::size_t yx = 0; yx < ny * nx; ++yx) {
      double s = 0.0;
      for (std::size_t xt = 0; xt < nx; ++xt) s += G[yx * nx + xt] * p[xt];
      rate[yx] = s;
    }
    node_flow(spec, rate, p, dp);
  };
  return slice(rk4(f, spec.mu0, grid, spec.horizon, options.steps), grid, 0, nx);
}

namespace {

// Node rates against mu (x) theta: rate[y * nx + x].
void iid_rates(const ModelSpec& spec, std::span<const double> p, std::span<const double> theta,
               std::vector<double>& rate) {
  const std::size_t nx = spec.num_node_states(), ny = spec.num_marks(), ne = spec.num_edge_states();
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      double s = 0.0;
      for (std::size_t xt = 0; xt < nx; ++xt) {
        if (p[xt] == 0.0) continue;
        double inner = 0.0;
        for (std::size_t xi = 0; xi < ne; ++xi) inner += spec.gamma(y, x, xt, xi) * theta[xi];
        s += p[xt] * inner;
      }
      rate[y * nx + x] = spec.rho[y] * s;
    }
}

}  // namespace

MarginalLaw forward_equation_iid(const ModelSpec& spec, const MarginalLaw& theta, std::span<const double> grid,
                                 OdeOptions options) {
  check_grid(grid, spec.horizon);
  const std::size_t nx = spec.num_node_states(), ny = spec.num_marks();
  std::vector<double> rate(ny * nx), th;
  const Field f = [&](double t, const std::vector<double>& p, std::vector<double>& dp) {
    law_at(theta, t, th);
    iid_rates(spec, p, th, rate);
    node_flow(spec, rate, p, dp);
  };
  return slice(rk4(f, spec.mu0, grid, spec.horizon, options.steps), grid, 0, nx);
}

std::pair<MarginalLaw, MarginalLaw> forward_equation_iid_markov(const ModelSpec& spec, double beta,
                                                                std::span<const double> grid, OdeOptions options) {
  check_grid(grid, spec.horizon);
  const std::size_t nx = spec.num_node_states(), ny = spec.num_marks(), ne = spec.num_edge_states();
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t xi = 0; xi < ne; ++xi)
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t xt = 0; xt < nx; ++xt)
          if (spec.gamma_tilde(y, xi, x, xt) != spec.gamma_tilde(y, xi, 0, 0))
            throw std::invalid_argument("forward_equation_iid_markov: edge rates depend on node states");
  const Eigen::MatrixXd R = beta * edge_generator(spec, 0, 0);
  std::vector<double> rate(ny * nx);
  const Field f = [&](double, const std::vector<double>& z, std::vector<double>& dz) {
    const std::span<const double> p(z.data(), nx), th(z.data() + nx, ne);
    iid_rates(spec, p, th, rate);
    node_flow(spec, rate, z, dz);
    for (std::size_t col = 0; col < ne; ++col) {
      double s = 0.0;
      for (std::size_t row = 0; row < ne; ++row)
        s += th[row] * R(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
      dz[nx + col] = s;
    }
  };
  std::vector<double> z0 = spec.mu0;
  z0.insert(z0.end(), spec.theta0.begin(), spec.theta0.end());
  const auto states = rk4(f, z0, grid, spec.horizon, options.steps);
  return {slice(states, grid, 0, nx), slice(states, grid, nx, ne)};
}

double max_law_gap(const MarginalLaw& a, const MarginalLaw& b) {
  if (a.grid != b.grid) throw std::invalid_argument("max_law_gap: grids differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.p.size(); ++k)
    for (std::size_t q = 0; q < a.p[k].size(); ++q) worst = std::max(worst, std::abs(a.p[k][q] - b.p[k][q]));
  return worst;
}

std::size_t initial_node_index(const ModelSpec& spec, std::uint64_t seed, std::uint32_t id) {
  return sample_index(spec.mu0, keyed_uniform(seed, StreamKind::NodeInit, id, 0));
}

Path sample_accel_limit(const ModelSpec& spec, const InvariantMeasureMap& Q, const MarginalLaw& mu,
                        const PrmStream& stream, std::size_t x0) {
  const std::size_t nx = spec.num_node_states(), ny = spec.num_marks(), ne = spec.num_edge_states();
  std::vector<double> G(ny * nx * nx, 0.0);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t xt = 0; xt < nx; ++xt)
        for (std::size_t xi = 0; xi < ne; ++xi) G[(y * nx + x) * nx + xt] += spec.gamma(y, x, xt, xi) * Q(x, xt, xi);
  std::vector<double> m;
  return thin_path(spec, stream, x0, [&](std::size_t y, std::size_t x, double s) {
    law_at(mu, s, m);
    double r = 0.0;
    for (std::size_t xt = 0; xt < nx; ++xt) r += G[(y * nx + x) * nx + xt] * m[xt];
    return r;
  });
}

Path sample_iid_limit(const ModelSpec& spec, const MarginalLaw& mu, const MarginalLaw& theta,
                      const PrmStream& stream, std::size_t x0) {
  const std::size_t nx = spec.num_node_states(), ne = spec.num_edge_states();
  std::vector<double> m, th;
  return thin_path(spec, stream, x0, [&](std::size_t y, std::size_t x, double s) {
    law_at(mu, s, m);
    law_at(theta, s, th);
    double r = 0.0;
    for (std::size_t xt = 0; xt < nx; ++xt)
      for (std::size_t xi = 0; xi < ne; ++xi) r += spec.gamma(y, x, xt, xi) * m[xt] * th[xi];
    return r;
  });
}

NSystem reference_limit_beta(const ModelSpec& spec, std::size_t n_ref, std::uint64_t seed,
                             const StreamFamily& family, SimOptions options) {
  NSystem sys = NSystem::init(spec, n_ref, seed, options);
  sys.run(family, spec.horizon);
  return sys;
}

Eigen::MatrixXd autonomous_generator(const ModelSpec& spec) {
  if (!spec.clt) throw std::invalid_argument("autonomous_generator: spec has no separable example");
  const auto& c = *spec.clt;
  const std::size_t nx = spec.num_node_states();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(nx));
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < spec.num_marks(); ++y) {
      const auto target = spec.node_target(x, y);
      if (!target) continue;
      const double r = spec.rho[y] * (c.c0[y] * c.b0[x] + c.c3[y]);
      R(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(*target)) += r;
      R(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) -= r;
    }
  return R;
}

MarginalLaw autonomous_law(const ModelSpec& spec, std::span<const double> grid, OdeOptions options) {
  check_grid(grid, spec.horizon);
  return forward_linear(autonomous_generator(spec), spec.mu0, grid, options);
}

double autonomous_second_moment(const ModelSpec& spec, OdeOptions options) {
  const std::vector<double> grid{0.0, spec.horizon};
  const auto law = autonomous_law(spec, grid, options);
  double m2 = 0.0;
  for (std::size_t k = 0; k < spec.num_node_states(); ++k) {
    const double v = spec.spaces.node.value(k);
    m2 += v * v * law.p.back()[k];
  }
  return m2;
}

}  // namespace mfnet
