#pragma once

#include <cstddef>
#include <span>

#include "surgefreq/distributions.hpp"

namespace surgefreq {

inline constexpr double kDefaultAlpha = 0.05;

/// Outcome of a screening or goodness-of-fit test. `passed` means the null
/// hypothesis (independence, stationarity, good fit) was not rejected.
struct TestVerdict {
  double statistic = 0.0;
  double critical_value = 0.0;
  double alpha = kDefaultAlpha;
  bool passed = false;
  bool infinite_statistic = false;
};

struct AicScore {
  double value = 0.0;
  int k = 2;
  std::size_t n = 0;
};

/// Spearman's rank correlation: Pearson correlation of the ranks, with tied
/// values given their average rank.
[[nodiscard]] double spearman_rho(std::span<const double> x, std::span<const double> y);

/// Stationarity test on Spearman's rho between the values and their time
/// index 1..N, t = r_s sqrt((N - 2) / (1 - r_s^2)).
///
/// passed (stationary) iff |t| < the two-sided Student t critical value with
/// N - 2 degrees of freedom. |r_s| = 1 yields an infinite statistic and a
/// non-stationary verdict rather than an exception.
[[nodiscard]] TestVerdict stationarity_t_test(std::span<const double> values, double alpha = kDefaultAlpha);

/// t statistic of the stationarity test for a given rank correlation.
[[nodiscard]] double spearman_t_statistic(double rho, std::size_t n);

/// Wald-Wolfowitz runs test about the median (normal approximation).
///
/// Values equal to the median are dropped. statistic = (R - mu_R) / sigma_R
/// and passed (independent) iff |z| < the two-sided normal critical value.
/// Throws std::invalid_argument when fewer than 10 values are given or no
/// runs can be formed.
[[nodiscard]] TestVerdict runs_test(std::span<const double> values, double alpha = kDefaultAlpha);

/// One-sample Kolmogorov-Smirnov statistic D_max = sup |F(x) - F_N(x)|
/// against `fit`. The critical value is the exact Kolmogorov quantile for N
/// (0.210 at N = 40, alpha = 0.05); passed iff D_max < critical.
[[nodiscard]] TestVerdict ks_statistic(std::span<const double> sample, const FittedDistribution& fit,
                                       double alpha = kDefaultAlpha);

/// AIC = 2k - 2 sum ln f(x_j) with k = 2. Throws std::domain_error when a
/// sample point has zero density.
[[nodiscard]] AicScore aic(const FittedDistribution& fit, std::span<const double> sample);

}  // namespace surgefreq
