#include "mfnet/catalog.hpp"

#include <algorithm>
#include <stdexcept>

namespace mfnet {

namespace {

// Up-rate 1 + 8 x~ xi~, down-rate 1 + 8 [xi~ = 0].
ModelSpec three_state_base() {
  ModelSpec spec;
  spec.spaces = {IndexedStates({0, 1, 2}), IndexedStates({0, 1}), IndexedStates({-1, 1})};
  spec.rho = {1.0, 1.0};
  spec.gamma = NodeKernel(2, 3, 2);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t xt = 0; xt < 3; ++xt)
      for (std::size_t xi = 0; xi < 2; ++xi) {
        if (x > 0) spec.gamma.at(0, x, xt, xi) = 1.0 + (xi == 0 ? 8.0 : 0.0);
        if (x < 2) spec.gamma.at(1, x, xt, xi) = 1.0 + 8.0 * static_cast<double>(xt * xi);
      }
  spec.gamma_tilde = EdgeKernel(2, 3, 2);
  spec.horizon = 1.0;
  spec.mu0 = {0.5, 0.3, 0.2};
  spec.theta0 = {0.6, 0.4};
  return spec;
}

ModelSpec separable_base(const std::vector<double>& b0, double c2) {
  ModelSpec spec;
  std::vector<int> nodes;
  for (int v = -6; v <= 6; ++v) nodes.push_back(v);
  spec.spaces = {IndexedStates(nodes), IndexedStates({-1, 0, 1}), IndexedStates({-1, 1})};
  spec.rho = {1.0, 1.0};
  CltExample c;
  c.c0 = {0.3, 0.3};
  c.c1 = {-0.2, 0.2};
  c.c2 = {c2, c2};
  c.c3 = {0.4, 0.4};
  c.b0 = b0;
  for (int v : nodes) c.b1.push_back(std::clamp(v, -1, 1));
  c.b2 = {-1.0, 0.0, 1.0};
  c.epsilon = 0.2;
  spec.clt = c;
  spec.gamma_tilde = EdgeKernel(2, nodes.size(), 3);
  spec.beta = BetaSchedule::constant(1.0);
  spec.horizon = 1.0;
  spec.mu0.assign(nodes.size(), 0.0);
  spec.mu0[6] = 1.0;
  spec.theta0 = {0.0, 1.0, 0.0};
  return spec;
}

// Edges leave 0 in either direction at rate on(x, x~) and return at `off`.
template <typename On>
void symmetric_edges(ModelSpec& spec, On&& on, double off) {
  const std::size_t nx = spec.num_node_states();
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t xt = 0; xt < nx; ++xt) {
      const double a = on(spec.spaces.node.value(x), spec.spaces.node.value(xt));
      spec.gamma_tilde.at(0, 1, x, xt) = a;    // 0 -> -1
      spec.gamma_tilde.at(1, 1, x, xt) = a;    // 0 -> +1
      spec.gamma_tilde.at(1, 0, x, xt) = off;  // -1 -> 0
      spec.gamma_tilde.at(0, 2, x, xt) = off;  // +1 -> 0
    }
}

std::vector<double> default_b0() {
  std::vector<double> b0(13, 0.5);
  b0[6] = 1.0;
  return b0;
}

}  // namespace

ModelSpec default_test_model() {
  ModelSpec spec = three_state_base();
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t xt = 0; xt < 3; ++xt) {
      spec.gamma_tilde.at(1, 0, x, xt) = x == xt ? 0.05 : 0.1;
      spec.gamma_tilde.at(0, 1, x, xt) = 0.1;
    }
  spec.beta = {1.0, 1.0};
  set_tight_envelope(spec);
  return spec;
}

ModelSpec iid_test_model() {
  ModelSpec spec = three_state_base();
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t xt = 0; xt < 3; ++xt) {
      spec.gamma_tilde.at(1, 0, x, xt) = 0.075;
      spec.gamma_tilde.at(0, 1, x, xt) = 0.1;
    }
  spec.beta = BetaSchedule::constant(1.0);
  set_tight_envelope(spec);
  return spec;
}

ModelSpec comparison_test_model() {
  ModelSpec spec = three_state_base();
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t xt = 0; xt < 3; ++xt) {
      for (std::size_t xi = 0; xi < 2; ++xi) {
        spec.gamma.at(0, x, xt, xi) = x > 0 ? 0.7 : 0.0;
        spec.gamma.at(1, x, xt, xi) = x < 2 ? 0.3 + (xi == 1 && x == xt ? 3.0 : 0.0) : 0.0;
      }
      spec.gamma_tilde.at(1, 0, x, xt) = x == xt ? 0.09 : 0.01;
      spec.gamma_tilde.at(0, 1, x, xt) = x == xt ? 0.01 : 0.09;
    }
  spec.beta = {1.0, 1.0};
  set_tight_envelope(spec);
  return spec;
}

ModelSpec clt_test_model() {
  ModelSpec spec = separable_base(default_b0(), 0.1);
  symmetric_edges(spec, [](int x, int xt) { return x * xt > 0 ? 0.5 : 0.2; }, 0.5);
  apply_clt_kernel(spec);
  set_tight_envelope(spec);
  return spec;
}

ModelSpec clt_trace_model() {
  ModelSpec spec = separable_base(std::vector<double>(13, 1.0), 0.1);
  symmetric_edges(spec, [](int x, int xt) { return x * xt > 0 ? 0.5 : 0.2; }, 0.5);
  apply_clt_kernel(spec);
  set_tight_envelope(spec);
  return spec;
}

ModelSpec clt_mixture_model(bool coupled) {
  ModelSpec spec = separable_base(default_b0(), coupled ? 0.1 : 0.0);
  if (coupled)
    symmetric_edges(spec, [](int x, int) { return x == 0 ? 0.02 : 1.5; }, 0.5);
  else
    symmetric_edges(spec, [](int, int) { return 0.3; }, 0.5);
  apply_clt_kernel(spec);
  set_tight_envelope(spec);
  return spec;
}

std::vector<std::string> catalog_names() {
  return {"default", "iid", "comparison", "clt", "clt_trace", "clt_mixture_free", "clt_mixture_coupled"};
}

ModelSpec catalog_model(const std::string& name) {
  if (name == "default") return default_test_model();
  if (name == "iid") return iid_test_model();
  if (name == "comparison") return comparison_test_model();
  if (name == "clt") return clt_test_model();
  if (name == "clt_trace") return clt_trace_model();
  if (name == "clt_mixture_free") return clt_mixture_model(false);
  if (name == "clt_mixture_coupled") return clt_mixture_model(true);
  throw std::invalid_argument("unknown catalog model '" + name + "'");
}

}  // namespace mfnet
