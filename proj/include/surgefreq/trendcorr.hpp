#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surgefreq/stattests.hpp"
#include "surgefreq/windowscan.hpp"

namespace surgefreq {

struct TrendPoint {
  double year = 0.0;
  double value_cm = 0.0;
};

/// OLS trend of a cm-valued series against the year, reported in mm/year.
///
/// Standard errors are plain OLS. Window-start regressors from overlapping
/// windows are serially correlated, so the SE understates the true
/// uncertainty of window-scan trends.
struct TrendResult {
  double slope_mm_per_year = 0.0;
  double intercept_cm = 0.0;
  double slope_se_mm_per_year = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  double critical_value = 0.0;
  bool significant = false;   // |t| > critical; an exact fit counts iff slope != 0
  bool exact_fit = false;     // residuals vanish, SE reported as 0
  std::size_t n = 0;
};

/// Pearson correlation summary between two paired series.
struct Correlation {
  double r = 0.0;
  double r_squared = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;
  std::size_t n = 0;
};

struct TrendRow {
  std::string label;                  // probability as text, "alpha" or "beta"
  std::optional<double> probability;
  TrendResult trend;
};

struct CovariateCorrelation {
  std::string target_label;
  std::optional<double> probability;
  std::string covariate_label;
  double r_squared = 0.0;
  bool significant = false;
  std::size_t n = 0;
  double r = 0.0;
  double p_value = 1.0;
};

/// Requires n >= 3 points and at least two distinct years.
[[nodiscard]] TrendResult linear_trend(std::span<const TrendPoint> series, double alpha = kDefaultAlpha);

/// R^2 of two nonconstant series of equal length n >= 3, with significance
/// from t = r sqrt((n - 2) / (1 - r^2)) at n - 2 degrees of freedom.
[[nodiscard]] Correlation r_squared(std::span<const double> xs, std::span<const double> ys,
                                    double alpha = kDefaultAlpha);

/// Label used for a probability row, e.g. "0.001".
[[nodiscard]] std::string probability_label(double p);

/// One trend per exceedance probability (ascending p), then the Gumbel
/// location and scale series, regressed on the window start year.
[[nodiscard]] std::vector<TrendRow> quantile_trend_table(const ScanResult& scan, const WindowSpec& spec);

/// Correlates each window's quantiles and Gumbel parameters with a
/// per-window covariate (one entry per window, nullopt = absent).
/// A row whose target series is constant gets NaN r and R^2 and is not
/// significant. Throws std::invalid_argument with fewer than 3 paired windows
/// or a constant covariate.
[[nodiscard]] std::vector<CovariateCorrelation> covariate_correlation_table(
    const ScanResult& scan, std::span<const std::optional<double>> covariate, const std::string& covariate_label,
    const WindowSpec& spec);

/// Same, using the windowed covariate stored under `covariate_name`.
[[nodiscard]] std::vector<CovariateCorrelation> covariate_correlation_table(const ScanResult& scan,
                                                                            const std::string& covariate_name,
                                                                            const WindowSpec& spec);

}  // namespace surgefreq
