#include <doctest.h>

#include <random>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "surgefreq/special.hpp"

using namespace surgefreq::special;
using doctest::Approx;

namespace {

void check_close(double got, double want, double rel) {
  CHECK(std::abs(got - want) <= rel * std::max(1.0, std::abs(want)));
}

}  // namespace

// Values frozen from 50-digit mpmath evaluations.
TEST_CASE("digamma and trigamma match high-precision values") {
  const double xs[] = {0.5, 1.0, 2.5, 10.0, 150.0};
  const double psi[] = {-1.9635100260214235, -0.5772156649015329, 0.7031566406452432, 2.251752589066721,
                        5.007298257075679};
  const double psi1[] = {4.934802200544679, 1.6449340668482264, 0.4903577561002349, 0.10516633568168575,
                         0.006688938271165995};
  for (int i = 0; i < 5; ++i) {
    check_close(digamma(xs[i]), psi[i], 1e-12);
    check_close(trigamma(xs[i]), psi1[i], 1e-12);
  }
}

TEST_CASE("digamma agrees with Boost over a wide range") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> logx(std::log(1e-3), std::log(1e4));
  for (int i = 0; i < 2000; ++i) {
    const double x = std::exp(logx(rng));
    check_close(digamma(x), boost::math::digamma(x), 1e-12);
    check_close(trigamma(x), boost::math::trigamma(x), 1e-11);
  }
}

TEST_CASE("regularized incomplete gamma") {
  check_close(gamma_p(3.0, 2.5), 0.45618688411667, 1e-12);
  check_close(gamma_p(150.0, 140.0), 0.20954362391860707, 1e-11);
  check_close(gamma_p(0.5, 0.1), 0.34527915398142295, 1e-12);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> la(std::log(0.1), std::log(500.0));
  std::uniform_real_distribution<double> ratio(0.2, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = std::exp(la(rng));
    const double x = a * ratio(rng);
    CHECK(gamma_p(a, x) == Approx(boost::math::gamma_p(a, x)).epsilon(1e-10));
    CHECK(gamma_p(a, x) + gamma_q(a, x) == Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("regularized incomplete beta") {
  check_close(incomplete_beta(2.5, 3.5, 0.3), 0.29675298929566636, 1e-12);
  check_close(incomplete_beta(19.0, 0.5, 0.9), 0.04682035076643047, 1e-11);
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ab(0.3, 80.0), x01(0.001, 0.999);
  for (int i = 0; i < 1000; ++i) {
    const double a = ab(rng), b = ab(rng), x = x01(rng);
    CHECK(std::abs(incomplete_beta(a, b, x) - boost::math::ibeta(a, b, x)) < 1e-12);
  }
}

TEST_CASE("normal distribution") {
  check_close(normal_cdf(-3.2), 0.0006871379379158471, 1e-12);
  check_close(normal_quantile(0.975), 1.959963984540054, 1e-14);
  check_close(normal_quantile(1e-10), -6.361340902404056, 1e-13);
  const boost::math::normal_distribution<double> n01;
  for (double p = 0.0005; p < 1.0; p += 0.0123) {
    check_close(normal_quantile(p), boost::math::quantile(n01, p), 1e-13);
    CHECK(normal_cdf(normal_quantile(p)) == Approx(p).epsilon(1e-13));
  }
}

TEST_CASE("Student t distribution") {
  check_close(student_t_cdf(2.0, 5.0), 0.9490302605850709, 1e-12);
  check_close(student_t_cdf(-1.3, 38.0), 0.10071571344556876, 1e-12);
  check_close(student_t_quantile(0.975, 1.0), 12.706204736432095, 1e-10);
  check_close(student_t_quantile(0.975, 3.0), 3.182446305284263, 1e-11);
  check_close(student_t_quantile(0.995, 120.0), 2.617421145106866, 1e-11);
  check_close(student_t_quantile(0.975, 38.0), 2.024394163911969, 1e-11);
  CHECK(student_t_critical(0.05, 38.0) == Approx(2.024394163911969).epsilon(1e-11));
  for (const double df : {2.0, 7.0, 38.0, 75.0, 98.0, 400.0}) {
    const boost::math::students_t_distribution<double> dist(df);
    for (const double p : {0.001, 0.05, 0.3, 0.5, 0.8, 0.975, 0.9995}) {
      CHECK(student_t_quantile(p, df) == Approx(boost::math::quantile(dist, p)).epsilon(1e-10));
    }
    CHECK(student_t_two_sided_p(1.7, df) == Approx(2.0 * boost::math::cdf(dist, -1.7)).epsilon(1e-11));
  }
  CHECK(student_t_quantile(0.5, 9.0) == Approx(0.0).epsilon(1e-14));
}

TEST_CASE("exact Kolmogorov distribution and critical values") {
  check_close(ks_critical_value(40, 0.05), 0.21011517372298608, 1e-9);
  check_close(ks_critical_value(1, 0.05), 0.975, 1e-9);
  check_close(ks_critical_value(10, 0.05), 0.4092460847775048, 1e-9);
  check_close(ks_critical_value(100, 0.05), 0.13402791648569778, 1e-9);
  CHECK(kolmogorov_cdf(40, ks_critical_value(40, 0.05)) == Approx(0.95).epsilon(1e-9));
  CHECK(kolmogorov_limit_cdf(1.3580986393225505) == Approx(0.95).epsilon(1e-12));
  CHECK(kolmogorov_cdf(10, 0.0) == 0.0);
  CHECK(kolmogorov_cdf(10, 1.0) == 1.0);
  // One observation: P(D <= d) = 2d - 1 for d in [1/2, 1].
  CHECK(kolmogorov_cdf(1, 0.8) == Approx(0.6).epsilon(1e-12));
  // Large n approaches the limiting law.
  const double d = 1.2 / std::sqrt(2000.0);
  CHECK(kolmogorov_cdf(2000, d) == Approx(kolmogorov_limit_cdf(1.2)).epsilon(5e-3));
  // Scaled critical values rise towards the limiting quantile.
  double previous = 0.0;
  for (std::size_t n : {5u, 10u, 20u, 40u, 80u, 160u, 320u, 640u}) {
    const double c = ks_critical_value(n, 0.05) * std::sqrt(static_cast<double>(n));
    CHECK(c > previous);
    CHECK(c < 1.3580986393225505);
    previous = c;
  }
}
