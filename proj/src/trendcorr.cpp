#include "surgefreq/trendcorr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "surgefreq/special.hpp"

namespace surgefreq {

namespace {

constexpr double kCmToMm = 10.0;
constexpr double kExactFitRelTol = 1e-12;

struct Moments {
  double x_mean = 0.0;
  double y_mean = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
};

template <typename GetX, typename GetY>
Moments centred_moments(std::size_t n, GetX x, GetY y) {
  Moments m;
  for (std::size_t i = 0; i < n; ++i) {
    m.x_mean += x(i);
    m.y_mean += y(i);
  }
  m.x_mean /= static_cast<double>(n);
  m.y_mean /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x(i) - m.x_mean;
    const double dy = y(i) - m.y_mean;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

std::vector<double> parameter_series(const ScanResult& scan, bool location) {
  std::vector<double> out;
  out.reserve(scan.windows.size());
  for (const auto& w : scan.windows) out.push_back(location ? w.location_alpha : w.scale_beta);
  return out;
}

std::vector<double> quantile_series(const ScanResult& scan, double p) {
  std::vector<double> out;
  out.reserve(scan.windows.size());
  for (const auto& w : scan.windows) {
    const auto q = w.quantile(p);
    if (!q) throw std::invalid_argument(fmt::format("scan has no quantile for p = {}", p));
    out.push_back(*q);
  }
  return out;
}

}  // namespace

TrendResult linear_trend(std::span<const TrendPoint> series, double alpha) {
  if (series.size() < 3) throw std::invalid_argument("linear_trend: need at least 3 points");
  const auto m = centred_moments(
      series.size(), [&](std::size_t i) { return series[i].year; },
      [&](std::size_t i) { return series[i].value_cm; });
  if (m.sxx == 0.0) throw std::invalid_argument("linear_trend: all years identical");

  const double slope = m.sxy / m.sxx;
  const double intercept = m.y_mean - slope * m.x_mean;
  double sse = 0.0;
  double scale = 0.0;
  for (const auto& pt : series) {
    const double r = pt.value_cm - (intercept + slope * pt.year);
    sse += r * r;
    scale = std::max(scale, std::abs(pt.value_cm));
  }
  const double df = static_cast<double>(series.size() - 2);
  const double residual_sd = std::sqrt(sse / df);

  TrendResult out;
  out.n = series.size();
  out.slope_mm_per_year = slope * kCmToMm;
  out.intercept_cm = intercept;
  out.critical_value = special::student_t_critical(alpha, df);
  if (residual_sd <= kExactFitRelTol * std::max(scale, 1.0)) {
    out.exact_fit = true;
    out.slope_se_mm_per_year = 0.0;
    const bool moving = std::abs(slope) > kExactFitRelTol * std::max(scale, 1.0);
    out.t_statistic = moving ? std::copysign(std::numeric_limits<double>::infinity(), slope) : 0.0;
    out.p_value = moving ? 0.0 : 1.0;
    out.significant = moving;
    if (!moving) out.slope_mm_per_year = 0.0;
    return out;
  }
  const double se = residual_sd / std::sqrt(m.sxx);
  out.slope_se_mm_per_year = se * kCmToMm;
  out.t_statistic = slope / se;
  out.p_value = special::student_t_two_sided_p(out.t_statistic, df);
  out.significant = std::abs(out.t_statistic) > out.critical_value;
  return out;
}

Correlation r_squared(std::span<const double> xs, std::span<const double> ys, double alpha) {
  if (xs.size() != ys.size()) throw std::invalid_argument("r_squared: length mismatch");
  if (xs.size() < 3) throw std::invalid_argument("r_squared: need at least 3 pairs");
  const auto m = centred_moments(
      xs.size(), [&](std::size_t i) { return xs[i]; }, [&](std::size_t i) { return ys[i]; });
  if (m.sxx == 0.0 || m.syy == 0.0) throw std::invalid_argument("r_squared: constant input");

  Correlation out;
  out.n = xs.size();
  out.r = std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
  out.r_squared = out.r * out.r;
  const double df = static_cast<double>(xs.size() - 2);
  out.t_statistic = spearman_t_statistic(out.r, xs.size());
  out.p_value = special::student_t_two_sided_p(out.t_statistic, df);
  out.significant = std::abs(out.t_statistic) > special::student_t_critical(alpha, df);
  return out;
}

std::string probability_label(double p) { return fmt::format("{}", p); }

std::vector<TrendRow> quantile_trend_table(const ScanResult& scan, const WindowSpec& spec) {
  if (scan.windows.size() < 3) throw std::invalid_argument("quantile_trend_table: need at least 3 windows");
  auto trend_of = [&](const std::vector<double>& values) {
    std::vector<TrendPoint> points;
    points.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      points.push_back({static_cast<double>(scan.windows[i].start_year), values[i]});
    }
    return linear_trend(points, spec.alpha);
  };

  std::vector<TrendRow> rows;
  for (const double p : spec.probabilities) {
    rows.push_back({probability_label(p), p, trend_of(quantile_series(scan, p))});
  }
  rows.push_back({"alpha", std::nullopt, trend_of(parameter_series(scan, true))});
  rows.push_back({"beta", std::nullopt, trend_of(parameter_series(scan, false))});
  return rows;
}

std::vector<CovariateCorrelation> covariate_correlation_table(const ScanResult& scan,
                                                              std::span<const std::optional<double>> covariate,
                                                              const std::string& covariate_label,
                                                              const WindowSpec& spec) {
  if (covariate.size() != scan.windows.size()) {
    throw std::invalid_argument("covariate_correlation_table: one covariate entry per window required");
  }
  std::vector<std::size_t> paired;
  std::vector<double> cov;
  for (std::size_t i = 0; i < covariate.size(); ++i) {
    if (covariate[i]) {
      paired.push_back(i);
      cov.push_back(*covariate[i]);
    }
  }
  if (paired.size() < 3) {
    throw std::invalid_argument(fmt::format("covariate '{}': {} paired windows, need at least 3",
                                            covariate_label, paired.size()));
  }

  auto row = [&](std::string label, std::optional<double> p, const std::vector<double>& target) {
    std::vector<double> ys;
    ys.reserve(paired.size());
    for (const std::size_t i : paired) ys.push_back(target[i]);
    if (std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys.front(); })) {
      // A constant target (e.g. a held scale parameter) has no defined R^2.
      const double nan = std::numeric_limits<double>::quiet_NaN();
      return CovariateCorrelation{std::move(label), p, covariate_label, nan, false, ys.size(), nan, nan};
    }
    const Correlation c = r_squared(cov, ys, spec.alpha);
    return CovariateCorrelation{std::move(label), p, covariate_label, c.r_squared, c.significant,
                                c.n,              c.r, c.p_value};
  };

  std::vector<CovariateCorrelation> rows;
  for (const double p : spec.probabilities) {
    rows.push_back(row(probability_label(p), p, quantile_series(scan, p)));
  }
  rows.push_back(row("alpha", std::nullopt, parameter_series(scan, true)));
  rows.push_back(row("beta", std::nullopt, parameter_series(scan, false)));
  return rows;
}

std::vector<CovariateCorrelation> covariate_correlation_table(const ScanResult& scan,
                                                              const std::string& covariate_name,
                                                              const WindowSpec& spec) {
  std::vector<std::optional<double>> values;
  values.reserve(scan.windows.size());
  for (const auto& w : scan.windows) {
    const auto it = w.covariates.find(covariate_name);
    if (it == w.covariates.end()) {
      throw std::invalid_argument(fmt::format("covariate '{}' was not part of the scan", covariate_name));
    }
    values.push_back(it->second);
  }
  return covariate_correlation_table(scan, values, covariate_name, spec);
}

}  // namespace surgefreq
