#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace surgefreq {

/// The four candidate families. GEV is intentionally not offered.
enum class Family { gamma, log_normal, gumbel, weibull };

inline constexpr std::array<Family, 4> kAllFamilies = {Family::gamma, Family::log_normal,
                                                       Family::gumbel, Family::weibull};

[[nodiscard]] std::string_view to_string(Family family);
[[nodiscard]] Family parse_family(std::string_view text);
[[nodiscard]] constexpr std::size_t index_of(Family family) { return static_cast<std::size_t>(family); }

/// Parameter names per family, e.g. {"alpha", "beta"} for Gumbel.
[[nodiscard]] std::array<std::string_view, 2> parameter_names(Family family);

/// A two-parameter distribution, usually produced by fit_mle().
///
/// Parameter layout:
///   gumbel      params[0] = location alpha (cm), params[1] = scale beta (cm)
///   log_normal  params[0] = mu of ln x,          params[1] = sigma of ln x
///   gamma       params[0] = shape k,             params[1] = scale theta (cm)
///   weibull     params[0] = shape k,             params[1] = scale lambda (cm)
struct FittedDistribution {
  Family family = Family::gumbel;
  std::array<double, 2> params{0.0, 1.0};
  double log_likelihood = 0.0;
  std::size_t n = 0;
  bool converged = true;
  int iterations = 0;

  static FittedDistribution gumbel(double location, double scale);
  static FittedDistribution log_normal(double mu, double sigma);
  static FittedDistribution gamma(double shape, double scale);
  static FittedDistribution weibull(double shape, double scale);

  /// Throws std::invalid_argument unless every parameter constraint holds.
  void validate() const;
};

/// fit_mle() failed to meet tolerance; `last` holds the final iterate with
/// converged = false.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, FittedDistribution last)
      : std::runtime_error(what), last(last) {}
  FittedDistribution last;
};

struct SolverSettings {
  double relative_tolerance = 1e-10;
  int max_iterations = 200;
};

/// Whether x lies in the support (x > 0 for the positive families).
[[nodiscard]] bool in_support(Family family, double x);

// Density functions. Gumbel uses the maximum convention
//   f(x) = exp(-z - exp(-z)) / beta,  z = (x - alpha) / beta.
// All throw std::domain_error for non-finite x or x outside the support.
[[nodiscard]] double pdf(const FittedDistribution& fit, double x);
[[nodiscard]] double log_pdf(const FittedDistribution& fit, double x);
[[nodiscard]] double cdf(const FittedDistribution& fit, double x);

/// P(X > x).
[[nodiscard]] double exceedance_probability(const FittedDistribution& fit, double x);

/// x_p with P(X > x_p) = p. Closed form for Gumbel and Weibull,
/// numerical inversion of the tail function otherwise.
[[nodiscard]] double exceedance_quantile(const FittedDistribution& fit, double p);

[[nodiscard]] double log_likelihood(const FittedDistribution& fit, std::span<const double> sample);

/// Maximum-likelihood fit. Requires at least 10 values in the family's
/// support that are not all identical.
///
/// Throws std::invalid_argument for too-small or degenerate samples,
/// std::domain_error for values outside the support, and
/// NonConvergenceError when an iterative solver runs out of iterations.
[[nodiscard]] FittedDistribution fit_mle(std::span<const double> sample, Family family,
                                         const SolverSettings& settings = {});

/// Gumbel fit with the scale held at a known value; only alpha is estimated.
[[nodiscard]] FittedDistribution fit_gumbel_known_scale(std::span<const double> sample, double scale);

struct PlottingPosition {
  double value = 0.0;
  std::size_t rank = 1;         // 1 = largest
  double exceedance_p = 0.0;    // rank / (N + 1)
};

/// Weibull plotting positions, sorted from the largest value down. Ties
/// take consecutive ranks in input order.
[[nodiscard]] std::vector<PlottingPosition> plotting_positions(std::span<const double> sample);

}  // namespace surgefreq
