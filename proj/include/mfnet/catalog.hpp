#pragma once

#include <string>
#include <vector>

#include "mfnet/model.hpp"

namespace mfnet {

// Built-in model instances used by the configs, the acceptance suite and the tests.

/// Three node states {0,1,2}, binary edges, marks {-1,+1}. Up-rate 1 + 8 x~ xi~, down-rate 1 + 8 [xi~ = 0];
/// edges switch on at 0.05 when x = x~ and 0.1 otherwise, off at 0.1. beta(n) = n.
ModelSpec default_test_model();
/// Same nodes, edges switching on at 0.075 and off at 0.1 regardless of the endpoints; beta = 1.
ModelSpec iid_test_model();
/// Up-rate 0.3 + 3 [x~ = x, xi~ = 1], down-rate 0.7. Edges sit on with probability 0.9 between equal
/// states and 0.1 otherwise, relaxing at rate 0.1 beta, so they lag behind node jumps. beta(n) = n.
ModelSpec comparison_test_model();
/// Separable example on {-6..6} x {-1,0,1}: c0 = 0.3, b0 = 1 at 0 else 0.5, c1 = +-0.2, b1 = clamp(x,-1,1),
/// c2 = 0.1, b2 = xi, c3 = 0.4, eps = 0.2. Edges leave 0 at 0.2 + 0.3 [x x~ > 0] and return at 0.5. beta = 1.
ModelSpec clt_test_model();
/// clt_test_model with b0 = 1 everywhere.
ModelSpec clt_trace_model();
/// Edge-functional setups: `coupled` makes edge activation depend strongly on the owner's state;
/// otherwise edges and node rates do not see each other.
ModelSpec clt_mixture_model(bool coupled);

std::vector<std::string> catalog_names();
/// Throws std::invalid_argument for an unknown name.
ModelSpec catalog_model(const std::string& name);

}  // namespace mfnet
