#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "oracles.hpp"
#include "surgefreq/series.hpp"

using namespace surgefreq;
using doctest::Approx;

namespace {

AnnualSeries parse(const std::string& text, SeriesKind kind = SeriesKind::annual_maximum) {
  std::istringstream in(text);
  return read_annual_csv(in, kind, "t");
}

AnnualSeries psmsl(const std::string& text, double offset = 0.0) {
  std::istringstream in(text);
  return read_psmsl_annual(in, offset, "p");
}

AnnualSeries make(std::vector<Observation> obs, SeriesKind kind = SeriesKind::annual_mean) {
  return AnnualSeries("s", kind, std::move(obs));
}

const std::string kData = SURGEFREQ_TEST_DATA;

}  // namespace

TEST_CASE("annual csv: gaps are absent years") {
  const auto s = parse("year,value\n2000,550\n2001,612\n2003,598\n");
  REQUIRE(s.size() == 3);
  CHECK_FALSE(s.contains(2002));
  CHECK(s.at(2001) == 612.0);
  CHECK(s.years() == std::vector<int>{2000, 2001, 2003});
}

TEST_CASE("annual csv: blank value, comments and CRLF") {
  const auto s = parse("year,value\r\n# note\r\n2000,550\r\n2001,\r\n\r\n2002, 560.5 \r\n");
  CHECK(s.years() == std::vector<int>{2000, 2002});
  CHECK(s.at(2002) == 560.5);
}

TEST_CASE("annual csv: rejected inputs") {
  CHECK_THROWS_AS(parse("year,value\n2000,550\n2000,560\n"), InputError);
  CHECK_THROWS_WITH_AS(parse("2000,550\n2000,560\n"), doctest::Contains("duplicate"), InputError);
  CHECK_THROWS_AS(parse("year,value\n2001,550\n2000,560\n"), InputError);
  CHECK_THROWS_AS(parse("year,value\n2000,nan\n"), InputError);
  CHECK_THROWS_AS(parse("year,value\n2000,inf\n"), InputError);
  CHECK_THROWS_AS(parse("year,value\n2000,0\n"), InputError);
  CHECK_THROWS_AS(parse("year,value\n2000,-3\n", SeriesKind::annual_mean), InputError);
  CHECK_THROWS_AS(parse("year,value\n2000,55x\n"), InputError);
  CHECK_THROWS_AS(parse("year,value\n2000,1,2\n"), InputError);
  CHECK_THROWS_AS((void)load_annual_csv("/nonexistent/file.csv", SeriesKind::annual_maximum), InputError);
}

TEST_CASE("annual csv: covariate indices may be signed") {
  const auto s = parse("year,value\n2000,-1.5\n2001,0\n", SeriesKind::covariate_index);
  CHECK(s.values() == std::vector<double>{-1.5, 0.0});
}

TEST_CASE("annual csv: write then read reproduces observations") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(1e-3, 1e4);
  std::bernoulli_distribution gap(0.2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Observation> obs;
    for (int y = 1800; y < 2000; ++y) {
      if (!gap(rng)) obs.push_back({y, v(rng)});
    }
    const auto original = make(obs, SeriesKind::annual_maximum);
    std::ostringstream out;
    write_annual_csv(out, original);
    const auto back = parse(out.str());
    REQUIRE(back.size() == original.size());
    CHECK(std::equal(back.observations().begin(), back.observations().end(),
                     original.observations().begin()));
  }
}

TEST_CASE("annual csv: year coverage of the three stations") {
  CHECK(load_annual_csv(kData + "/swinoujscie_max.csv", SeriesKind::annual_maximum).size() == 105);
  CHECK(load_annual_csv(kData + "/kolobrzeg_max.csv", SeriesKind::annual_maximum).size() == 139);
  CHECK(load_annual_csv(kData + "/gdansk_max.csv", SeriesKind::annual_maximum).size() == 116);
  const auto s = load_annual_csv(kData + "/swinoujscie_max.csv", SeriesKind::annual_maximum);
  CHECK(s.years().front() == 1901);
  CHECK(s.years().back() == 2007);
  CHECK_FALSE(s.contains(1945));
  CHECK_FALSE(s.contains(1946));
  CHECK(s.station_id() == "swinoujscie_max");
}

TEST_CASE("psmsl: unit conversion, offset and missing marker") {
  const auto one = psmsl("1886; 6950; 0; 000\n");
  REQUIRE(one.size() == 1);
  CHECK(one.at(1886) == Approx(695.0));
  CHECK(one.kind() == SeriesKind::annual_mean);
  CHECK(psmsl("1886; 6950; 0; 000\n", -200.0).at(1886) == Approx(495.0));

  const auto s = psmsl("1944; 6950; 0; 000\n1945;-99999;Y;000\n1946;7010;N;000\n");
  CHECK(s.size() == 2);
  CHECK_FALSE(s.contains(1945));
  CHECK(s.at(1946) == Approx(701.0));
}

TEST_CASE("psmsl: malformed and all-missing files") {
  CHECK_THROWS_AS(psmsl("1945;-99999;Y;000\n1946;-99999;Y;000\n"), InputError);
  CHECK_THROWS_AS(psmsl("1945 6950 0 000\n"), InputError);
  CHECK_THROWS_AS(psmsl("abcd;6950;0;000\n"), InputError);
  CHECK_THROWS_AS(psmsl("1945;69x0;0;000\n"), InputError);
  CHECK_THROWS_AS(psmsl("1945;6950;0;000;1\n"), InputError);
  CHECK_THROWS_AS(psmsl(""), InputError);
}

TEST_CASE("infill: identity regression copies the reference") {
  std::vector<Observation> t, r;
  for (int y = 1900; y < 1940; ++y) {
    const double v = 500.0 + (y % 7) * 3.0 + y * 0.1;
    t.push_back({y, v});
    r.push_back({y, v});
  }
  r.push_back({1941, 612.5});
  const int years[] = {1941};
  const auto [filled, report] = infill_by_regression(make(t), make(r), years);
  CHECK(filled.at(1941) == Approx(612.5).epsilon(1e-12));
  CHECK(report.regression_slope == Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(report.regression_intercept) < 1e-9);
  CHECK(report.r_squared_of_fit == Approx(1.0).epsilon(1e-12));
  CHECK(report.filled_years == std::vector<int>{1941});
  CHECK(report.overlap_years == 40);
}

TEST_CASE("infill: exact affine relation fills with zero residual") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> v(50.0, 400.0);
  std::vector<Observation> t, r;
  for (int y = 1900; y < 1960; ++y) {
    const double x = v(rng);
    r.push_back({y, x});
    if (y < 1941 || y > 1943) t.push_back({y, 2.0 * x + 30.0});
  }
  r[41].value = 100.0;  // 1941
  const int years[] = {1943, 1941, 1942};
  const auto [filled, report] = infill_by_regression(make(t), make(r), years);
  CHECK(std::abs(*filled.at(1941) - 230.0) < 1e-9);
  CHECK(std::abs(*filled.at(1942) - (2.0 * r[42].value + 30.0)) < 1e-9);
  CHECK(filled.size() == 60);
  CHECK(report.filled_years == std::vector<int>{1941, 1942, 1943});
  CHECK(report.r_squared_of_fit == Approx(1.0));
}

TEST_CASE("infill: overlap window restricts the regression") {
  std::vector<Observation> t, r;
  for (int y = 1900; y < 1960; ++y) {
    r.push_back({y, 100.0 + y % 11});
    // Relation changes after 1930; only the early regime should be fitted.
    if (y != 1950) t.push_back({y, y <= 1930 ? 3.0 * (100.0 + y % 11) : 50.0 + 0.5 * (y % 11)});
  }
  const int years[] = {1950};
  const auto [filled, report] = infill_by_regression(make(t), make(r), years, YearRange{1900, 1930});
  CHECK(report.overlap_years == 31);
  CHECK(report.regression_slope == Approx(3.0));
  CHECK(filled.at(1950) == Approx(3.0 * r[50].value));
}

TEST_CASE("infill: preconditions") {
  std::vector<Observation> t, r;
  for (int y = 1900; y < 1909; ++y) {
    t.push_back({y, 10.0 + y % 3});
    r.push_back({y, 20.0 + y % 4});
  }
  r.push_back({1950, 30.0});
  const int years[] = {1950};
  CHECK_THROWS_AS((void)infill_by_regression(make(t), make(r), years), std::invalid_argument);  // 9 years

  t.push_back({1909, 12.0});
  r.insert(r.end() - 1, {1909, 22.0});
  CHECK_NOTHROW((void)infill_by_regression(make(t), make(r), years));
  const int absent[] = {1951};
  CHECK_THROWS_AS((void)infill_by_regression(make(t), make(r), absent), std::invalid_argument);
  const int present[] = {1905};
  CHECK_THROWS_AS((void)infill_by_regression(make(t), make(r), present), std::invalid_argument);
  CHECK_THROWS_AS((void)infill_by_regression(make(t, SeriesKind::annual_maximum), make(r), years),
                  std::invalid_argument);
}

TEST_CASE("infill: noisy pair stays within three prediction standard errors") {
  constexpr int kTrials = 1000;
  constexpr double a = 5.0, b = 1.1, noise = 2.0;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> ref_level(300.0, 15.0), eps(0.0, noise);
  int inside = 0;
  for (int trial = 0; trial < kTrials; ++trial) {
    std::vector<Observation> t, r;
    double held_out = 0.0;
    for (int y = 1900; y <= 1960; ++y) {
      const double x = ref_level(rng);
      const double y_val = a + b * x + eps(rng);
      r.push_back({y, x});
      if (y == 1960) {
        held_out = y_val;
      } else {
        t.push_back({y, y_val});
      }
    }
    const int years[] = {1960};
    const auto [filled, report] = infill_by_regression(make(t), make(r), years);
    REQUIRE(report.overlap_years == 60);

    double xbar = 0.0, sxx = 0.0, sse = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) xbar += r[i].value;
    xbar /= static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      sxx += (r[i].value - xbar) * (r[i].value - xbar);
      const double resid = t[i].value - report.regression_intercept - report.regression_slope * r[i].value;
      sse += resid * resid;
    }
    const double s = std::sqrt(sse / 58.0);
    const double x0 = r.back().value;
    const double se = s * std::sqrt(1.0 + 1.0 / 60.0 + (x0 - xbar) * (x0 - xbar) / sxx);
    if (std::abs(*filled.at(1960) - held_out) <= 3.0 * se) ++inside;
  }
  CHECK(inside >= 990);
}

TEST_CASE("monthly maxima") {
  std::vector<MonthlyObservation> m;
  const double values[] = {-1.2, 0.3, 2.1, 0.5, -0.4, 1.9, 0.0, -2.2, 1.1, 0.2, 2.0, -0.9};
  for (int i = 0; i < 12; ++i) m.push_back({1950, i + 1, values[i]});
  m.push_back({1960, 7, -0.5});
  const auto out = annual_max_of_monthly(MonthlySeries("nao", m));
  CHECK(out.kind() == SeriesKind::covariate_index);
  REQUIRE(out.size() == 2);
  CHECK(out.at(1950) == 2.1);
  CHECK(out.at(1960) == -0.5);
  CHECK_THROWS_AS((void)annual_max_of_monthly(MonthlySeries("nao", {})), std::invalid_argument);
}

TEST_CASE("monthly maxima agree with exhaustive scan on random input") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> v(0.0, 1.5);
  std::bernoulli_distribution keep(0.7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<MonthlyObservation> m;
    for (int y = 1990; y < 1990 + 2 + trial % 5; ++y) {
      for (int mo = 1; mo <= 12; ++mo) {
        if (keep(rng) || mo == 12) m.push_back({y, mo, v(rng)});
      }
    }
    std::map<int, double> brute;
    for (const auto& o : m) {
      auto [it, fresh] = brute.try_emplace(o.year, o.value);
      if (!fresh) it->second = std::max(it->second, o.value);
    }
    const auto out = annual_max_of_monthly(MonthlySeries("x", m));
    REQUIRE(out.size() == brute.size());
    for (const auto& [year, mx] : brute) CHECK(out.at(year) == mx);
  }
}

TEST_CASE("monthly csv validation") {
  std::istringstream ok("year,month,value\n1950,1,0.5\n1950,2,-1\n");
  CHECK(read_monthly_csv(ok, "m").size() == 2);
  std::istringstream bad_month("year,month,value\n1950,13,0.5\n");
  CHECK_THROWS_AS((void)read_monthly_csv(bad_month, "m"), InputError);
  std::istringstream unordered("year,month,value\n1950,2,0.5\n1950,1,0.5\n");
  CHECK_THROWS_AS((void)read_monthly_csv(unordered, "m"), InputError);
  std::istringstream nonfinite("year,month,value\n1950,2,nan\n");
  CHECK_THROWS_AS((void)read_monthly_csv(nonfinite, "m"), InputError);
}

TEST_CASE("series kinds round-trip through text") {
  for (const auto k : {SeriesKind::annual_maximum, SeriesKind::annual_mean, SeriesKind::covariate_index}) {
    CHECK(parse_series_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS((void)parse_series_kind("daily"), InputError);
}
