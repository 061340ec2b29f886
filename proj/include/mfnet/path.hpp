#pragma once

#include <span>
#include <utility>
#include <vector>

namespace mfnet {

/// Right-continuous piecewise-constant integer path on [0, T].
struct Path {
  int initial = 0;
  std::vector<std::pair<double, int>> jumps;  // (time, new value), strictly increasing times

  int at(double t) const;
  int final_value() const { return jumps.empty() ? initial : jumps.back().second; }
  /// Integral of f(x(s)) over [0, t], exact for piecewise-constant paths.
  template <typename F>
  double integral(double t, F&& f) const {
    double total = 0.0, prev = 0.0;
    int state = initial;
    for (const auto& [s, v] : jumps) {
      if (s >= t) break;
      total += f(state) * (s - prev);
      prev = s;
      state = v;
    }
    return total + f(state) * (t - prev);
  }
};

/// Draw an index from unnormalized weights by inverting the CDF at u in (0,1).
std::size_t sample_index(std::span<const double> weights, double u);

}  // namespace mfnet
