#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "surgefreq/special.hpp"
#include "surgefreq/trendcorr.hpp"

using namespace surgefreq;
using doctest::Approx;

namespace {

AnnualSeries gumbel_series(std::mt19937_64& rng, int first, int last, double location, double scale,
                           double location_drift = 0.0, double scale_drift = 0.0) {
  std::vector<Observation> obs;
  for (int y = first; y <= last; ++y) {
    std::extreme_value_distribution<double> d(location + location_drift * (y - first),
                                              scale + scale_drift * (y - first));
    obs.push_back({y, d(rng)});
  }
  return AnnualSeries("synthetic", SeriesKind::annual_maximum, std::move(obs));
}

// Slope and its standard error from the raw normal equations, in long double.
std::pair<double, double> normal_equation_fit(std::span<const TrendPoint> pts) {
  long double n = pts.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    sx += p.year;
    sy += p.value_cm;
    sxx += static_cast<long double>(p.year) * p.year;
    sxy += static_cast<long double>(p.year) * p.value_cm;
  }
  const long double det = n * sxx - sx * sx;
  const long double b = (n * sxy - sx * sy) / det;
  const long double a = (sy - b * sx) / n;
  long double sse = 0;
  for (const auto& p : pts) {
    const long double r = p.value_cm - a - b * p.year;
    sse += r * r;
  }
  const long double se = std::sqrt(sse / (n - 2) * n / det);
  return {static_cast<double>(b), static_cast<double>(se)};
}

}  // namespace

TEST_CASE("noiseless line is an exact fit") {
  std::vector<TrendPoint> pts;
  for (int y = 1900; y < 1977; ++y) pts.push_back({static_cast<double>(y), 500.0 + 0.2 * (y - 1900)});
  const auto t = linear_trend(pts);
  CHECK(t.slope_mm_per_year == Approx(2.0).epsilon(1e-12));
  CHECK(t.slope_se_mm_per_year == 0.0);
  CHECK(t.exact_fit);
  CHECK(t.significant);
  CHECK(t.intercept_cm == Approx(500.0 - 0.2 * 1900).epsilon(1e-9));
}

TEST_CASE("constant series has no trend") {
  std::vector<TrendPoint> pts;
  for (int y = 1900; y < 1940; ++y) pts.push_back({static_cast<double>(y), 612.3});
  const auto t = linear_trend(pts);
  CHECK(t.slope_mm_per_year == 0.0);
  CHECK_FALSE(t.significant);
  CHECK(t.p_value == 1.0);
}

TEST_CASE("linear_trend preconditions") {
  const std::vector<TrendPoint> two = {{1900, 1}, {1901, 2}};
  CHECK_THROWS_AS((void)linear_trend(two), std::invalid_argument);
  const std::vector<TrendPoint> same_year = {{1900, 1}, {1900, 2}, {1900, 3}};
  CHECK_THROWS_AS((void)linear_trend(same_year), std::invalid_argument);
}

TEST_CASE("linear_trend agrees with the normal equations") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TrendPoint> pts;
    for (int y = 1886; y < 1886 + 77; ++y) pts.push_back({static_cast<double>(y), 520.0 + 0.15 * (y - 1886) + noise(rng)});
    const auto t = linear_trend(pts);
    const auto [slope, se] = normal_equation_fit(pts);
    CHECK(t.slope_mm_per_year == Approx(10.0 * slope).epsilon(1e-9));
    CHECK(t.slope_se_mm_per_year == Approx(10.0 * se).epsilon(1e-8));
    CHECK(t.t_statistic == Approx(slope / se).epsilon(1e-8));
    CHECK(t.slope_se_mm_per_year > 0.0);
    CHECK(t.critical_value == Approx(special::student_t_critical(0.05, 75)).epsilon(1e-14));
    CHECK(t.significant == (std::abs(t.t_statistic) > t.critical_value));
    CHECK(t.significant == (t.p_value < 0.05));
  }
}

TEST_CASE("slope recovery over 77 windows") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 3.0);
  int covered = 0;
  constexpr int kTrials = 1000;
  for (int trial = 0; trial < kTrials; ++trial) {
    std::vector<TrendPoint> pts;
    for (int y = 1886; y < 1886 + 77; ++y) pts.push_back({static_cast<double>(y), 600.0 + 0.29 * (y - 1886) + noise(rng)});
    const auto t = linear_trend(pts);
    if (std::abs(t.slope_mm_per_year - 2.9) <= 3.0 * t.slope_se_mm_per_year) ++covered;
  }
  CHECK(covered >= 990);
}

TEST_CASE("slope is equivariant under added drift") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 5.0);
  std::vector<TrendPoint> pts;
  for (int y = 1901; y < 1967; ++y) pts.push_back({static_cast<double>(y), 550.0 + noise(rng)});
  const double base = linear_trend(pts).slope_mm_per_year;
  for (const double d : {-0.3, 0.05, 0.29, 1.7}) {
    auto shifted = pts;
    for (auto& p : shifted) p.value_cm += d * (p.year - 1901);
    CHECK(std::abs(linear_trend(shifted).slope_mm_per_year - base - 10.0 * d) < 1e-9);
  }
}

TEST_CASE("r_squared: exact and orthogonal relations") {
  std::vector<double> xs(20), ys(20);
  for (int i = 0; i < 20; ++i) {
    xs[i] = i * 0.7 - 3;
    ys[i] = 3 * xs[i] + 7;
  }
  const auto exact = r_squared(xs, ys);
  CHECK(exact.r_squared == Approx(1.0).epsilon(1e-14));
  CHECK(exact.significant);
  CHECK(exact.p_value == Approx(0.0));

  const std::vector<double> x = {-2, -1, 0, 1, 2};
  const std::vector<double> y = {4, 1, 0, 1, 4};  // zero sample covariance with x
  const auto zero = r_squared(x, y);
  CHECK(zero.r_squared == Approx(0.0));
  CHECK_FALSE(zero.significant);

  CHECK_THROWS_AS((void)r_squared(x, std::vector<double>(5, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS((void)r_squared(std::vector<double>{1, 2}, std::vector<double>{1, 3}), std::invalid_argument);
  CHECK_THROWS_AS((void)r_squared(x, std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("r_squared: oracle, symmetry and affine invariance") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs(67), ys(67);
    for (int i = 0; i < 67; ++i) {
      xs[i] = z(rng);
      ys[i] = 0.4 * xs[i] + z(rng);
    }
    const auto c = r_squared(xs, ys);
    const double r = oracle::pearson(xs, ys);
    CHECK(std::abs(c.r_squared - r * r) < 1e-12);
    CHECK(r_squared(ys, xs).r_squared == Approx(c.r_squared).epsilon(1e-13));
    auto xs2 = xs, ys2 = ys;
    for (auto& v : xs2) v = 12.5 * v - 400;
    for (auto& v : ys2) v = 0.01 * v + 3;
    CHECK(r_squared(xs2, ys2).r_squared == Approx(c.r_squared).epsilon(1e-10));
    const double t = r * std::sqrt(65.0 / (1.0 - r * r));
    CHECK(c.significant == (std::abs(t) > special::student_t_critical(0.05, 65)));
  }
}

TEST_CASE("trend table rows and probability labels") {
  std::mt19937_64 rng(5);
  const WindowSpec spec;
  const auto result = scan(gumbel_series(rng, 1886, 2007, 560, 40, 0.29), spec);
  const auto rows = quantile_trend_table(result, spec);
  REQUIRE(rows.size() == spec.probabilities.size() + 2);
  CHECK(rows[0].label == "0.001");
  CHECK(rows[6].label == "0.1");
  CHECK(rows[10].label == "0.99");
  CHECK(rows[11].label == "alpha");
  CHECK(rows[12].label == "beta");
  CHECK(rows[11].trend.n == result.windows.size());
}

TEST_CASE("constant-scale scans give identical slopes on every row") {
  std::mt19937_64 rng(6);
  WindowSpec spec;
  spec.known_gumbel_scale = 50.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto result = scan(gumbel_series(rng, 1858, 2007, 600, 50, 0.29), spec);
    const auto rows = quantile_trend_table(result, spec);
    const double alpha_slope = rows[rows.size() - 2].trend.slope_mm_per_year;
    for (std::size_t i = 0; i < spec.probabilities.size(); ++i) {
      CHECK(std::abs(rows[i].trend.slope_mm_per_year - alpha_slope) < 1e-9);
    }
    CHECK(rows.back().trend.slope_mm_per_year == 0.0);
  }
}

TEST_CASE("scale decline flips the trend sign across the probability range") {
  std::mt19937_64 rng(7);
  const WindowSpec spec;
  int flipped = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto result = scan(gumbel_series(rng, 1858, 2007, 600, 90, 0.0, -0.3), spec);
    const auto rows = quantile_trend_table(result, spec);
    if (rows.front().trend.slope_mm_per_year < 0.0 && rows[10].trend.slope_mm_per_year > 0.0) ++flipped;
  }
  CHECK(flipped >= 18);
}

TEST_CASE("stationary scans: trend rows") {
  // OLS significance on overlapping windows is liberal (see the window scan
  // tests); report the rate, and check every row's slope is centred on zero.
  std::mt19937_64 rng(8);
  const WindowSpec spec;
  constexpr int kTrials = 100;
  int all_quiet = 0;
  std::vector<std::vector<double>> slopes(spec.probabilities.size() + 2);
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto rows = quantile_trend_table(scan(gumbel_series(rng, 1858, 2007, 600, 50), spec), spec);
    bool quiet = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      slopes[i].push_back(rows[i].trend.slope_mm_per_year);
      quiet = quiet && !rows[i].trend.significant;
    }
    if (quiet) ++all_quiet;
  }
  for (const auto& s : slopes) {
    double mean = 0.0, var = 0.0;
    for (const double v : s) mean += v;
    mean /= kTrials;
    for (const double v : s) var += (v - mean) * (v - mean);
    CHECK(std::abs(mean) < 3.5 * std::sqrt(var / (kTrials - 1) / kTrials));
  }
  MESSAGE("all rows not significant in " << all_quiet << " of " << kTrials << " trials");
}

TEST_CASE("correlation table: self-correlation") {
  std::mt19937_64 rng(9);
  const WindowSpec spec;
  const auto result = scan(gumbel_series(rng, 1886, 2007, 560, 50, 0.2), spec);
  std::vector<std::optional<double>> alpha;
  for (const auto& w : result.windows) alpha.emplace_back(w.location_alpha);
  const auto table = covariate_correlation_table(result, alpha, "alpha_self", spec);
  REQUIRE(table.size() == spec.probabilities.size() + 2);
  CHECK(table[table.size() - 2].target_label == "alpha");
  CHECK(table[table.size() - 2].r_squared == Approx(1.0).epsilon(1e-12));
  CHECK(table.front().n == result.windows.size());
}

TEST_CASE("correlation table: location affine in the covariate with constant scale") {
  std::mt19937_64 rng(10);
  WindowSpec spec;
  spec.known_gumbel_scale = 50.0;
  const auto result = scan(gumbel_series(rng, 1886, 2007, 560, 50, 0.2), spec);
  std::vector<std::optional<double>> msl;
  for (const auto& w : result.windows) msl.emplace_back((w.location_alpha - 100.0) / 1.3);
  const auto table = covariate_correlation_table(result, msl, "msl", spec);
  for (std::size_t i = 0; i + 1 < table.size(); ++i) {
    CHECK(table[i].r_squared == Approx(1.0).epsilon(1e-12));
    CHECK(table[i].significant);
  }
  CHECK(table.back().target_label == "beta");
  CHECK(std::isnan(table.back().r_squared));
  CHECK_FALSE(table.back().significant);
}

TEST_CASE("correlation table pairs only windows with a covariate value") {
  std::mt19937_64 rng(11);
  const WindowSpec spec;
  const auto result = scan(gumbel_series(rng, 1901, 1950, 600, 50), spec);
  REQUIRE(result.windows.size() == 11);
  std::vector<std::optional<double>> cov(11);
  cov[0] = 1.0;
  cov[4] = 2.0;
  CHECK_THROWS_AS((void)covariate_correlation_table(result, cov, "x", spec), std::invalid_argument);
  cov[7] = 0.5;
  cov[9] = 3.0;
  const auto rows = covariate_correlation_table(result, cov, "x", spec);
  CHECK(rows.front().n == 4);
  CHECK(rows.front().covariate_label == "x");
  CHECK_THROWS_AS((void)covariate_correlation_table(result, "msl", spec), std::invalid_argument);
  cov.pop_back();
  CHECK_THROWS_AS((void)covariate_correlation_table(result, cov, "x", spec), std::invalid_argument);
}
