#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace surgefreq {

/// Raised for unreadable or malformed input files and for series that would
/// violate their invariants.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SeriesKind { annual_maximum, annual_mean, covariate_index };

[[nodiscard]] std::string_view to_string(SeriesKind kind);
[[nodiscard]] SeriesKind parse_series_kind(std::string_view text);

struct Observation {
  int year = 0;
  double value = 0.0;  // cm above datum, or a dimensionless index

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// One station's yearly observations. Gap years are simply absent.
///
/// Years are strictly increasing and values finite; water-level kinds must
/// additionally be strictly positive. Immutable after construction.
class AnnualSeries {
 public:
  AnnualSeries(std::string station_id, SeriesKind kind, std::vector<Observation> observations);

  [[nodiscard]] const std::string& station_id() const noexcept { return station_id_; }
  [[nodiscard]] SeriesKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::span<const Observation> observations() const noexcept { return observations_; }
  [[nodiscard]] std::size_t size() const noexcept { return observations_.size(); }
  [[nodiscard]] bool empty() const noexcept { return observations_.empty(); }

  [[nodiscard]] std::vector<int> years() const;
  [[nodiscard]] std::vector<double> values() const;
  [[nodiscard]] std::optional<double> at(int year) const;
  [[nodiscard]] bool contains(int year) const { return at(year).has_value(); }

 private:
  std::string station_id_;
  SeriesKind kind_;
  std::vector<Observation> observations_;
};

struct MonthlyObservation {
  int year = 0;
  int month = 1;  // 1..12
  double value = 0.0;
};

class MonthlySeries {
 public:
  MonthlySeries(std::string label, std::vector<MonthlyObservation> observations);

  [[nodiscard]] const std::string& label() const noexcept { return label_; }
  [[nodiscard]] std::span<const MonthlyObservation> observations() const noexcept { return observations_; }
  [[nodiscard]] std::size_t size() const noexcept { return observations_.size(); }

 private:
  std::string label_;
  std::vector<MonthlyObservation> observations_;
};

struct InfillReport {
  std::vector<int> filled_years;
  double regression_slope = 0.0;
  double regression_intercept = 0.0;
  double r_squared_of_fit = 0.0;
  std::size_t overlap_years = 0;
};

struct YearRange {
  int first = 0;
  int last = 0;
  [[nodiscard]] bool contains(int year) const noexcept { return year >= first && year <= last; }
};

// Annual CSV: header `year,value`, blank value = gap.
[[nodiscard]] AnnualSeries read_annual_csv(std::istream& in, SeriesKind kind, std::string station_id);
[[nodiscard]] AnnualSeries load_annual_csv(const std::filesystem::path& path, SeriesKind kind);
[[nodiscard]] AnnualSeries load_annual_csv(const std::filesystem::path& path, SeriesKind kind,
                                           std::string station_id);
void write_annual_csv(std::ostream& out, const AnnualSeries& series);
void save_annual_csv(const std::filesystem::path& path, const AnnualSeries& series);

/// PSMSL annual "metric" layout: `year; value_mm; flag; missing_days`, with
/// -99999 marking a missing year. Values are converted to cm and shifted by
/// `datum_offset_cm`. The result has kind annual_mean.
[[nodiscard]] AnnualSeries read_psmsl_annual(std::istream& in, double datum_offset_cm,
                                             std::string station_id);
[[nodiscard]] AnnualSeries load_psmsl_annual(const std::filesystem::path& path,
                                             double datum_offset_cm = 0.0);

// Monthly CSV: header `year,month,value`.
[[nodiscard]] MonthlySeries read_monthly_csv(std::istream& in, std::string label);
[[nodiscard]] MonthlySeries load_monthly_csv(const std::filesystem::path& path);

/// Fills `years_to_fill` in `target` from an OLS fit target = a + b * reference
/// over the years both series share. When `overlap` is given, only shared
/// years inside it enter the fit. At least 10 overlapping years are required.
[[nodiscard]] std::pair<AnnualSeries, InfillReport> infill_by_regression(
    const AnnualSeries& target, const AnnualSeries& reference, std::span<const int> years_to_fill,
    std::optional<YearRange> overlap = std::nullopt);

/// One covariate_index value per calendar year: the largest monthly value.
[[nodiscard]] AnnualSeries annual_max_of_monthly(const MonthlySeries& monthly);

}  // namespace surgefreq
