#include "mfnet/path.hpp"

#include <algorithm>
#include <numeric>

namespace mfnet {

int Path::at(double t) const {
  auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                             [](double v, const std::pair<double, int>& j) { return v < j.first; });
  return it == jumps.begin() ? initial : std::prev(it)->second;
}

std::size_t sample_index(std::span<const double> weights, double u) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double target = u * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_positive = k;
    if (target < acc) return k;
  }
  return last_positive;
}

}  // namespace mfnet
