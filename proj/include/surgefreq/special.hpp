#pragma once

#include <cstddef>

/// Special functions and reference distributions used by the fitting and
/// testing code: polygamma, incomplete gamma/beta, Normal, Student t and the
/// Kolmogorov distribution of the one-sample K-S statistic.
namespace surgefreq::special {

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Digamma function psi(x) for x > 0.
///
/// Upward recurrence psi(x) = psi(x + 1) - 1/x until the argument reaches 6,
/// then the asymptotic Bernoulli series. Absolute accuracy is better than
/// 1e-12 on (0, inf).
[[nodiscard]] double digamma(double x);

/// Trigamma function psi'(x) for x > 0, same scheme as digamma().
[[nodiscard]] double trigamma(double x);

/// Regularized lower incomplete gamma P(a, x).
[[nodiscard]] double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), evaluated
/// directly so that small upper tails keep full relative precision.
[[nodiscard]] double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b).
[[nodiscard]] double incomplete_beta(double a, double b, double x);

[[nodiscard]] double normal_cdf(double z);

/// Inverse of normal_cdf. Acklam's rational approximation refined by one
/// Halley step against erfc, which brings it to near machine precision.
[[nodiscard]] double normal_quantile(double p);

[[nodiscard]] double student_t_cdf(double t, double df);

/// Inverse Student t CDF, obtained by inverting the incomplete beta function.
[[nodiscard]] double student_t_quantile(double p, double df);

/// Two-sided critical value |t| at significance level alpha.
[[nodiscard]] double student_t_critical(double alpha, double df);

/// Two-sided p-value for an observed t statistic.
[[nodiscard]] double student_t_two_sided_p(double t, double df);

/// Exact distribution P(D_n < d) of the one-sample Kolmogorov-Smirnov
/// statistic (Marsaglia, Tsang and Wang, 2003).
[[nodiscard]] double kolmogorov_cdf(std::size_t n, double d);

/// Limiting distribution P(sqrt(n) D_n <= x) as n -> inf.
[[nodiscard]] double kolmogorov_limit_cdf(double x);

/// Critical value d such that P(D_n >= d) = alpha.
///
/// Exact for n <= 500; above that the limiting quantile with Stephens'
/// finite-n correction. Results are memoized per (n, alpha).
[[nodiscard]] double ks_critical_value(std::size_t n, double alpha);

}  // namespace surgefreq::special
