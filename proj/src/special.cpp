#include "surgefreq/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace surgefreq::special {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxSeriesTerms = 100000;

// Prefactor x^a e^-x / Gamma(a) shared by both incomplete gamma branches.
double gamma_prefactor(double a, double x) {
  return std::exp(a * std::log(x) - x - std::lgamma(a));
}

double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < kMaxSeriesTerms; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * gamma_prefactor(a, x);
    }
  }
  throw std::runtime_error("gamma_p: series failed to converge");
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeriesTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return gamma_prefactor(a, x) * h;
    }
  }
  throw std::runtime_error("gamma_q: continued fraction failed to converge");
}

double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxSeriesTerms; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction failed to converge");
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error(std::string(what) + ": argument must be positive and finite");
  }
}

// Square matrix stored row-major, with a decimal exponent carried separately
// so that H^n does not overflow for large n.
struct ScaledMatrix {
  std::size_t m = 0;
  std::vector<double> a;
  int exponent = 0;
};

ScaledMatrix multiply(const ScaledMatrix& x, const ScaledMatrix& y) {
  ScaledMatrix out{x.m, std::vector<double>(x.m * x.m, 0.0), x.exponent + y.exponent};
  for (std::size_t i = 0; i < x.m; ++i) {
    for (std::size_t k = 0; k < x.m; ++k) {
      const double xik = x.a[i * x.m + k];
      if (xik == 0.0) continue;
      for (std::size_t j = 0; j < x.m; ++j) {
        out.a[i * x.m + j] += xik * y.a[k * x.m + j];
      }
    }
  }
  return out;
}

ScaledMatrix power(const ScaledMatrix& h, std::size_t n) {
  if (n == 1) return h;
  ScaledMatrix half = power(h, n / 2);
  ScaledMatrix out = multiply(half, half);
  if (n % 2 == 1) out = multiply(h, out);
  const std::size_t mid = (h.m / 2) * h.m + h.m / 2;
  if (out.a[mid] > 1e140) {
    for (double& v : out.a) v *= 1e-140;
    out.exponent += 140;
  }
  return out;
}

}  // namespace

double digamma(double x) {
  require_positive(x, "digamma");
  double shift = 0.0;
  while (x < 6.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli terms B_2k / (2k x^2k), k = 1..7.
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double shift = 0.0;
  while (x < 6.0) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 + inv * (0.5 +
                          inv * (1.0 / 6.0 -
                                 inv2 * (1.0 / 30.0 -
                                         inv2 * (1.0 / 42.0 -
                                                 inv2 * (1.0 / 30.0 -
                                                         inv2 * (5.0 / 66.0 -
                                                                 inv2 * (691.0 / 2730.0 -
                                                                         inv2 * 7.0 / 6.0))))))));
  return shift + series;
}

double gamma_p(double a, double x) {
  require_positive(a, "gamma_p");
  if (!(x >= 0.0)) throw std::domain_error("gamma_p: x must be non-negative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  require_positive(a, "gamma_q");
  if (!(x >= 0.0)) throw std::domain_error("gamma_q: x must be non-negative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double incomplete_beta(double a, double b, double x) {
  require_positive(a, "incomplete_beta");
  require_positive(b, "incomplete_beta");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("incomplete_beta: x outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double lower = 0.02425;
  double x = 0.0;
  if (p < lower) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - lower) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement; in the upper half work with the complementary tail.
  const double err = (p <= 0.5) ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
  const double u = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double student_t_cdf(double t, double df) {
  require_positive(df, "student_t_cdf");
  if (std::isnan(t)) throw std::domain_error("student_t_cdf: NaN argument");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t > 0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
  require_positive(df, "student_t_quantile");
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("student_t_quantile: p outside (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(1.0 - p, df);
  // Upper tail mass q = 0.5 * I_x(df/2, 1/2) with x = df / (df + t^2);
  // I_x is increasing in x, so bisect on x with a relative stopping rule.
  const double target = 2.0 * (1.0 - p);
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 4000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (incomplete_beta(0.5 * df, 0.5, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4.0 * kEps * lo) break;
  }
  const double x = 0.5 * (lo + hi);
  return std::sqrt(df * (1.0 - x) / x);
}

double student_t_critical(double alpha, double df) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("student_t_critical: alpha outside (0, 1)");
  return student_t_quantile(1.0 - 0.5 * alpha, df);
}

double student_t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(0.5 * df, 0.5, x);
}

double kolmogorov_cdf(std::size_t n, double d) {
  if (n == 0) throw std::invalid_argument("kolmogorov_cdf: n must be positive");
  const double nd = static_cast<double>(n) * d;
  if (nd <= 0.5) return 0.0;
  if (d >= 1.0) return 1.0;
  const auto k = static_cast<std::size_t>(nd) + 1;
  const std::size_t m = 2 * k - 1;
  const double h = static_cast<double>(k) - nd;

  ScaledMatrix hm{m, std::vector<double>(m * m, 0.0), 0};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      hm.a[i * m + j] = (i + 1 >= j) ? 1.0 : 0.0;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    hm.a[i * m] -= std::pow(h, static_cast<double>(i + 1));
    hm.a[(m - 1) * m + i] -= std::pow(h, static_cast<double>(m - i));
  }
  if (2.0 * h - 1.0 > 0.0) hm.a[(m - 1) * m] += std::pow(2.0 * h - 1.0, static_cast<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i + 1 > j) {
        for (std::size_t g = 1; g <= i + 1 - j; ++g) hm.a[i * m + j] /= static_cast<double>(g);
      }
    }
  }

  const ScaledMatrix q = power(hm, n);
  double s = q.a[(k - 1) * m + (k - 1)];
  int exponent = q.exponent;
  const double dn = static_cast<double>(n);
  for (std::size_t i = 1; i <= n; ++i) {
    s = s * static_cast<double>(i) / dn;
    if (s < 1e-140) {
      s *= 1e140;
      exponent -= 140;
    }
  }
  return std::clamp(s * std::pow(10.0, exponent), 0.0, 1.0);
}

double kolmogorov_limit_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 1.0) {
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double sum = 0.0;
    for (int k = 1; k < 50; ++k) {
      const double odd = 2.0 * k - 1.0;
      sum += std::exp(-odd * odd * w);
    }
    return std::sqrt(2.0 * std::numbers::pi) / x * sum;
  }
  double sum = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return 1.0 - 2.0 * sum;
}

double ks_critical_value(std::size_t n, double alpha) {
  if (n == 0) throw std::invalid_argument("ks_critical_value: n must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("ks_critical_value: alpha outside (0, 1)");

  static std::mutex cache_mutex;
  static std::map<std::pair<std::size_t, double>, double> cache;
  {
    const std::scoped_lock lock(cache_mutex);
    if (auto it = cache.find({n, alpha}); it != cache.end()) return it->second;
  }

  const double dn = static_cast<double>(n);
  double critical = 0.0;
  if (n <= 500) {
    double lo = 0.5 / dn;
    double hi = 1.0;
    for (int i = 0; i < 80 && hi - lo > 1e-14; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (1.0 - kolmogorov_cdf(n, mid) > alpha) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    critical = 0.5 * (lo + hi);
  } else {
    double lo = 0.1;
    double hi = 5.0;
    for (int i = 0; i < 100 && hi - lo > 1e-14; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (1.0 - kolmogorov_limit_cdf(mid) > alpha) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double root_n = std::sqrt(dn);
    critical = 0.5 * (lo + hi) / (root_n + 0.12 + 0.11 / root_n);
  }

  const std::scoped_lock lock(cache_mutex);
  cache.emplace(std::pair{n, alpha}, critical);
  return critical;
}

}  // namespace surgefreq::special
