#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "surgefreq/distributions.hpp"
#include "surgefreq/series.hpp"

namespace surgefreq {

/// base + slope_per_year * (year - first_year)
struct LinearRamp {
  double base = 0.0;
  double slope_per_year = 0.0;
};

/// Annual draws from a family whose two parameters drift linearly in time.
struct DriftModel {
  Family family = Family::gumbel;
  LinearRamp param1;  // same layout as FittedDistribution::params[0]
  LinearRamp param2;  // same layout as FittedDistribution::params[1]
  int first_year = 1901;
  int last_year = 2007;
  std::uint64_t seed = 1;
  std::vector<int> gap_years;
  std::string station_id = "synthetic";
  SeriesKind kind = SeriesKind::annual_maximum;

  [[nodiscard]] FittedDistribution distribution_at(int year) const;
};

/// Uniform deviates strictly inside (0, 1): the top 52 bits of a
/// std::mt19937_64 draw, offset by half a step.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  std::mt19937_64 engine_;
};

/// One inverse-transform draw per non-gap year; the same model (and seed)
/// always produces the same series. Throws std::invalid_argument if the
/// parameters are invalid in any year of the range.
[[nodiscard]] AnnualSeries generate(const DriftModel& model);

/// Inverse-transform draw from `fit` for a uniform deviate u in (0, 1).
[[nodiscard]] double draw(const FittedDistribution& fit, double u);

}  // namespace surgefreq
