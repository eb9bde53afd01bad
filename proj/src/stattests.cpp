#include "surgefreq/stattests.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "surgefreq/special.hpp"

namespace surgefreq {

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double median_of(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman_rho: length mismatch");
  if (x.size() < 3) throw std::invalid_argument("spearman_rho: need at least 3 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mean = 0.5 * static_cast<double>(x.size() + 1);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("spearman_rho: zero rank variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_t_statistic(double rho, std::size_t n) {
  if (std::abs(rho) >= 1.0) return std::copysign(std::numeric_limits<double>::infinity(), rho);
  return rho * std::sqrt(static_cast<double>(n - 2) / (1.0 - rho * rho));
}

TestVerdict stationarity_t_test(std::span<const double> values, double alpha) {
  if (values.size() < 4) throw std::invalid_argument("stationarity_t_test: need at least 4 values");
  std::vector<double> time(values.size());
  std::iota(time.begin(), time.end(), 1.0);
  const double rho = spearman_rho(values, time);
  TestVerdict verdict;
  verdict.alpha = alpha;
  verdict.critical_value = special::student_t_critical(alpha, static_cast<double>(values.size() - 2));
  verdict.statistic = spearman_t_statistic(rho, values.size());
  verdict.infinite_statistic = std::isinf(verdict.statistic);
  verdict.passed = !verdict.infinite_statistic && std::abs(verdict.statistic) < verdict.critical_value;
  return verdict;
}

TestVerdict runs_test(std::span<const double> values, double alpha) {
  if (values.size() < 10) throw std::invalid_argument("runs_test: need at least 10 values");
  const double median = median_of(values);
  std::size_t above = 0;
  std::size_t below = 0;
  std::size_t runs = 0;
  int previous = 0;
  for (const double v : values) {
    if (v == median) continue;
    const int side = v > median ? 1 : -1;
    (side > 0 ? above : below) += 1;
    if (side != previous) ++runs;
    previous = side;
  }
  if (above == 0 || below == 0) {
    throw std::invalid_argument("runs_test: no runs definable (values on one side of the median)");
  }
  const double n1 = static_cast<double>(above);
  const double n2 = static_cast<double>(below);
  const double n = n1 + n2;
  const double mean_runs = 2.0 * n1 * n2 / n + 1.0;
  const double var_runs = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));

  TestVerdict verdict;
  verdict.alpha = alpha;
  verdict.critical_value = special::normal_quantile(1.0 - 0.5 * alpha);
  if (var_runs <= 0.0) {
    // One value on each side of the median: the run count carries no information.
    verdict.statistic = 0.0;
    verdict.passed = true;
    return verdict;
  }
  verdict.statistic = (static_cast<double>(runs) - mean_runs) / std::sqrt(var_runs);
  verdict.passed = std::abs(verdict.statistic) < verdict.critical_value;
  return verdict;
}

TestVerdict ks_statistic(std::span<const double> sample, const FittedDistribution& fit, double alpha) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d_max = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(fit, sorted[i]);
    const double upper = static_cast<double>(i + 1) / n;
    const double lower = static_cast<double>(i) / n;
    d_max = std::max({d_max, std::abs(f - upper), std::abs(f - lower)});
  }
  TestVerdict verdict;
  verdict.alpha = alpha;
  verdict.statistic = d_max;
  verdict.critical_value = special::ks_critical_value(sorted.size(), alpha);
  verdict.passed = d_max < verdict.critical_value;
  return verdict;
}

AicScore aic(const FittedDistribution& fit, std::span<const double> sample) {
  const double ll = log_likelihood(fit, sample);
  if (!std::isfinite(ll)) {
    throw std::domain_error(fmt::format("aic: zero density under the {} fit", to_string(fit.family)));
  }
  return {2.0 * 2.0 - 2.0 * ll, 2, sample.size()};
}

}  // namespace surgefreq
