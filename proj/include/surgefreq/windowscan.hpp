#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surgefreq/distributions.hpp"
#include "surgefreq/series.hpp"
#include "surgefreq/stattests.hpp"

namespace surgefreq {

/// Raised when a window cannot be analysed at all (no usable fit for the
/// selection policy).
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FamilyPolicy { fixed_gumbel, best_aic };

[[nodiscard]] std::string_view to_string(FamilyPolicy policy);
[[nodiscard]] FamilyPolicy parse_family_policy(std::string_view text);

/// How an annual covariate is reduced over a window's member years.
enum class CovariateReduction { mean, max };

[[nodiscard]] std::string_view to_string(CovariateReduction reduction);
[[nodiscard]] CovariateReduction parse_covariate_reduction(std::string_view text);

/// Exceedance levels 0.1% .. 99% used for the return-level table.
[[nodiscard]] std::vector<double> default_probabilities();

struct WindowSpec {
  std::size_t length = 40;
  std::vector<double> probabilities = default_probabilities();
  double alpha = kDefaultAlpha;
  FamilyPolicy policy = FamilyPolicy::fixed_gumbel;
  CovariateReduction covariate_reduction = CovariateReduction::mean;
  /// Largest fraction of member years a covariate may be missing before the
  /// window's covariate value is reported absent.
  double covariate_missing_tolerance = 0.10;
  /// When set, the Gumbel scale is held at this value and only the location
  /// is estimated.
  std::optional<double> known_gumbel_scale;

  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;
};

/// A run of `length` consecutive observations of the gap-collapsed series.
struct Window {
  int start_year = 0;
  std::vector<int> years;
  std::vector<double> values;
};

struct FamilyOutcome {
  Family family = Family::gumbel;
  std::optional<FittedDistribution> fit;  // present unless fitting threw outright
  std::optional<TestVerdict> ks;
  std::optional<AicScore> aic;
  std::string failure;

  /// Converged fit with K-S and AIC available.
  [[nodiscard]] bool usable() const { return fit && fit->converged && ks && aic; }
};

struct QuantilePoint {
  double probability = 0.0;
  double level_cm = 0.0;
};

struct WindowResult {
  int start_year = 0;
  std::vector<int> years;
  std::vector<double> values;
  std::optional<TestVerdict> runs;          // absent when the test is undefined
  std::optional<TestVerdict> stationarity;
  std::array<FamilyOutcome, 4> families;    // indexed by index_of(Family)
  Family selected_family = Family::gumbel;
  std::vector<QuantilePoint> quantiles;     // same order as WindowSpec::probabilities
  double location_alpha = 0.0;
  double scale_beta = 0.0;
  std::map<std::string, std::optional<double>> covariates;

  [[nodiscard]] const FamilyOutcome& outcome(Family f) const { return families[index_of(f)]; }
  [[nodiscard]] std::optional<double> quantile(double probability) const;
};

struct FamilySummary {
  Family family = Family::gumbel;
  std::size_t usable_windows = 0;
  double max_ks = 0.0;
  std::size_t ks_failures = 0;
  double mean_aic = 0.0;
  std::size_t lowest_aic_count = 0;  // strict minimum; ties count for nobody
};

struct ScanResult {
  std::string station_id;
  std::vector<WindowResult> windows;
  std::array<FamilySummary, 4> summary;
};

[[nodiscard]] std::vector<Window> make_windows(const AnnualSeries& series, std::size_t length);

/// Full per-window analysis: screening tests, all four fits with K-S and AIC,
/// family selection, return levels and windowed covariates. Screening
/// failures are recorded, never fatal.
[[nodiscard]] WindowResult analyze_window(const Window& window, const WindowSpec& spec,
                                          std::span<const AnnualSeries> covariates = {});

/// Windowed reduction of `covariate` over `years`, or nullopt when too many
/// member years are missing.
[[nodiscard]] std::optional<double> window_covariate(const AnnualSeries& covariate, std::span<const int> years,
                                                     const WindowSpec& spec);

[[nodiscard]] std::array<FamilySummary, 4> summarize(std::span<const WindowResult> windows);

/// Analyses every window of `series`. Windows are independent; with
/// threads > 1 they are processed concurrently and assembled in order.
[[nodiscard]] ScanResult scan(const AnnualSeries& series, const WindowSpec& spec,
                              std::span<const AnnualSeries> covariates = {}, unsigned threads = 1);

}  // namespace surgefreq
