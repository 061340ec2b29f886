#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfnet/path.hpp"

namespace mfnet {

/// Symmetric pairwise distances on a finite support.
class GroundMetric {
 public:
  GroundMetric() = default;
  GroundMetric(std::size_t size, std::vector<double> d);

  std::size_t size() const { return size_; }
  double operator()(std::size_t a, std::size_t b) const { return d_[a * size_ + b]; }

  /// L1 distance between integer tuples.
  static GroundMetric l1(const std::vector<std::vector<int>>& points);
  /// |a - b| on a list of integers.
  static GroundMetric line(const std::vector<int>& values);
  /// L1 on the product of two integer sets, row-major over (a, b).
  static GroundMetric product_l1(const std::vector<int>& first, const std::vector<int>& second);

  /// Description of the first failed metric axiom, if any.
  std::optional<std::string> violation(double tol = 1e-12) const;

 private:
  std::size_t size_ = 0;
  std::vector<double> d_;
};

/// Bounded-Lipschitz distance, solved exactly as a linear program over f.
/// Throws std::invalid_argument on size mismatch or an invalid metric.
double dbl_distance(std::span<const double> p, std::span<const double> q, const GroundMetric& d);

/// sup_{0<=s<=T} |a(s) - b(s)|, exact on the merged jump partition.
double sup_path_distance(const Path& a, const Path& b, double horizon);

struct RateFit {
  std::vector<double> xs, errors, ses;
  double slope = 0.0, intercept = 0.0;
  double ci_low = 0.0, ci_high = 0.0;
};

/// OLS of log(error) on log(x) with a t-based 95% interval on the slope.
RateFit fit_rate(std::span<const double> xs, std::span<const double> errors, std::span<const double> ses = {});

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_survival(double x);
KsResult ks_normal_test(std::span<const double> samples, double mean, double sd);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

Estimate mean_se(std::span<const double> samples);
/// Unbiased sample variance with its asymptotic standard error sqrt((m4 - s^4) / n).
Estimate variance_se(std::span<const double> samples);
/// Sample excess kurtosis m4 / m2^2 - 3 with a jackknife standard error.
Estimate excess_kurtosis(std::span<const double> samples);

}  // namespace mfnet
