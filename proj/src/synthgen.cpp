#include "surgefreq/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace surgefreq {

double UniformStream::next() {
  // 52 bits so that the largest value, 1 - 2^-53, is still representable.
  constexpr double kStep = 1.0 / 4503599627370496.0;  // 2^-52
  return (static_cast<double>(engine_() >> 12) + 0.5) * kStep;
}

FittedDistribution DriftModel::distribution_at(int year) const {
  const double dt = static_cast<double>(year - first_year);
  FittedDistribution fit{family,
                         {param1.base + param1.slope_per_year * dt, param2.base + param2.slope_per_year * dt}};
  try {
    fit.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("drift model invalid in {}: {}", year, e.what()));
  }
  return fit;
}

double draw(const FittedDistribution& fit, double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("draw: u outside (0, 1)");
  if (fit.family == Family::gumbel) {
    return fit.params[0] - fit.params[1] * std::log(-std::log(u));
  }
  // F^-1(u) = S^-1(1 - u).
  return exceedance_quantile(fit, 1.0 - u);
}

AnnualSeries generate(const DriftModel& model) {
  if (model.last_year < model.first_year) throw std::invalid_argument("generate: empty year range");
  std::vector<FittedDistribution> per_year;
  per_year.reserve(static_cast<std::size_t>(model.last_year - model.first_year + 1));
  for (int year = model.first_year; year <= model.last_year; ++year) {
    per_year.push_back(model.distribution_at(year));
  }

  UniformStream uniform(model.seed);
  std::vector<Observation> observations;
  for (int year = model.first_year; year <= model.last_year; ++year) {
    if (std::find(model.gap_years.begin(), model.gap_years.end(), year) != model.gap_years.end()) continue;
    const auto& fit = per_year[static_cast<std::size_t>(year - model.first_year)];
    observations.push_back({year, draw(fit, uniform.next())});
  }
  return AnnualSeries(model.station_id, model.kind, std::move(observations));
}

}  // namespace surgefreq
