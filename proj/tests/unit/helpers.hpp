#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "mfnet/model.hpp"
#include "mfnet/philox.hpp"

namespace testing {

using mfnet::ModelSpec;

// Three node states, binary edges, marks {-1,+1}; every kernel entry starts at zero.
inline ModelSpec blank_three_state() {
  ModelSpec spec;
  spec.spaces = {mfnet::IndexedStates({0, 1, 2}), mfnet::IndexedStates({0, 1}), mfnet::IndexedStates({-1, 1})};
  spec.rho = {1.0, 1.0};
  spec.gamma = mfnet::NodeKernel(2, 3, 2);
  spec.gamma_tilde = mfnet::EdgeKernel(2, 3, 2);
  spec.beta = mfnet::BetaSchedule::constant(1.0);
  spec.horizon = 1.0;
  spec.mu0 = {1.0, 0.0, 0.0};
  spec.theta0 = {1.0, 0.0};
  return spec;
}

// Node rates depend on the own state only: up at `up`, down at `down`.
inline ModelSpec autonomous_three_state(double up = 0.7, double down = 0.4) {
  ModelSpec spec = blank_three_state();
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t xt = 0; xt < 3; ++xt)
      for (std::size_t xi = 0; xi < 2; ++xi) {
        if (x > 0) spec.gamma.at(0, x, xt, xi) = down;
        if (x < 2) spec.gamma.at(1, x, xt, xi) = up;
      }
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t xt = 0; xt < 3; ++xt) {
      spec.gamma_tilde.at(1, 0, x, xt) = 0.3;
      spec.gamma_tilde.at(0, 1, x, xt) = 0.2;
    }
  mfnet::set_tight_envelope(spec);
  return spec;
}

// Node generator of a spec whose rates ignore the environment.
inline Eigen::MatrixXd own_state_generator(const ModelSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.num_node_states());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t x = 0; x < spec.num_node_states(); ++x)
    for (std::size_t y = 0; y < spec.num_marks(); ++y) {
      const auto to = spec.node_target(x, y);
      const double r = spec.rho[y] * spec.gamma(y, x, 0, 0);
      if (!to || r == 0.0) continue;
      R(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(*to)) += r;
      R(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) -= r;
    }
  return R;
}

inline std::vector<double> expm_law(const Eigen::MatrixXd& R, const std::vector<double>& p0, double t) {
  const Eigen::MatrixXd P = (R * t).exp();
  Eigen::RowVectorXd p = Eigen::Map<const Eigen::RowVectorXd>(p0.data(), static_cast<Eigen::Index>(p0.size()));
  const Eigen::RowVectorXd out = p * P;
  return {out.data(), out.data() + out.size()};
}

// Random probability vector from a keyed generator.
inline std::vector<double> random_simplex(mfnet::CounterRng& rng, std::size_t k) {
  std::vector<double> p(k);
  double total = 0.0;
  for (double& v : p) total += (v = rng.exponential(1.0));
  for (double& v : p) v /= total;
  return p;
}

// |observed - expected| within z binomial standard errors for every cell.
inline bool within_binomial(const std::vector<double>& counts, const std::vector<double>& probs, double runs,
                            double z = 3.0) {
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double sd = std::sqrt(std::max(probs[k] * (1.0 - probs[k]), 1e-12) / runs);
    if (std::abs(counts[k] / runs - probs[k]) > z * sd + 1e-12) return false;
  }
  return true;
}

}  // namespace testing
