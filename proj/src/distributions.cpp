#include "surgefreq/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "surgefreq/special.hpp"

namespace surgefreq {

namespace {

constexpr std::size_t kMinFitSample = 10;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double x) {
  if (!std::isfinite(x)) throw std::domain_error("non-finite argument");
}

void require_support(const FittedDistribution& fit, double x) {
  require_finite(x);
  if (!in_support(fit.family, x)) {
    throw std::domain_error(fmt::format("{}: x = {} outside the support", to_string(fit.family), x));
  }
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs, double mean) {
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct RootSolve {
  double x = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Newton iteration for the single positive root of a monotone function,
// falling back to bisection whenever a step leaves the current bracket.
// `step` returns {f(x), f'(x)}.
template <typename Step>
RootSolve solve_positive_root(Step&& step, double x0, bool increasing, const SolverSettings& settings) {
  double lo = 0.0;
  double hi = kInf;
  double x = x0;
  for (int it = 1; it <= settings.max_iterations; ++it) {
    const auto [value, slope] = step(x);
    if (value == 0.0) return {x, it, true};
    const bool below_root = increasing ? value < 0.0 : value > 0.0;
    (below_root ? lo : hi) = x;
    double next = x - value / slope;
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = std::isinf(hi) ? 2.0 * x : 0.5 * (lo + hi);
    }
    if (std::abs(next - x) <= settings.relative_tolerance * std::abs(next)) return {next, it, true};
    x = next;
  }
  return {x, settings.max_iterations, false};
}

void check_sample(std::span<const double> sample, Family family) {
  if (sample.size() < kMinFitSample) {
    throw std::invalid_argument(
        fmt::format("fit_mle: sample of {} values, need at least {}", sample.size(), kMinFitSample));
  }
  for (const double x : sample) {
    require_finite(x);
    if (!in_support(family, x)) {
      throw std::domain_error(
          fmt::format("fit_mle: value {} outside the {} support", x, to_string(family)));
    }
  }
  const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
  if (*lo == *hi) throw std::invalid_argument("fit_mle: degenerate sample (zero variance)");
}

FittedDistribution finish(FittedDistribution fit, std::span<const double> sample, const RootSolve& solve) {
  fit.n = sample.size();
  fit.iterations = solve.iterations;
  fit.converged = solve.converged;
  fit.log_likelihood = log_likelihood(fit, sample);
  if (!solve.converged) {
    throw NonConvergenceError(
        fmt::format("fit_mle: {} solver did not converge in {} iterations", to_string(fit.family),
                    solve.iterations),
        fit);
  }
  return fit;
}

FittedDistribution fit_log_normal(std::span<const double> sample) {
  double mu = 0.0;
  for (const double x : sample) mu += std::log(x);
  mu /= static_cast<double>(sample.size());
  double ss = 0.0;
  for (const double x : sample) ss += (std::log(x) - mu) * (std::log(x) - mu);
  const double sigma = std::sqrt(ss / static_cast<double>(sample.size()));
  if (!(sigma > 0.0)) throw std::invalid_argument("fit_mle: degenerate sample (zero variance)");
  return finish(FittedDistribution::log_normal(mu, sigma), sample, {0.0, 0, true});
}

// Profile equation beta = mean(x) - sum(x w) / sum(w), w = exp(-x / beta),
// solved on centred data; then alpha = -beta ln[(1/N) sum exp(-x / beta)].
FittedDistribution fit_gumbel(std::span<const double> sample, const SolverSettings& settings) {
  const double mean = mean_of(sample);
  std::vector<double> centred(sample.begin(), sample.end());
  for (double& y : centred) y -= mean;
  const double y_min = *std::min_element(centred.begin(), centred.end());

  auto step = [&](double beta) {
    const double shift = -y_min / beta;
    double sw = 0.0;
    double syw = 0.0;
    double syyw = 0.0;
    for (const double y : centred) {
      const double w = std::exp(-y / beta - shift);
      sw += w;
      syw += y * w;
      syyw += y * y * w;
    }
    const double weighted_mean = syw / sw;
    const double weighted_var = syyw / sw - weighted_mean * weighted_mean;
    return std::pair{beta + weighted_mean, 1.0 + std::max(weighted_var, 0.0) / (beta * beta)};
  };

  const double beta0 = sample_sd(sample, mean) * std::sqrt(6.0) / std::numbers::pi;
  const RootSolve solve = solve_positive_root(step, beta0, true, settings);
  const double beta = solve.x;
  const double shift = -y_min / beta;
  double sw = 0.0;
  for (const double y : centred) sw += std::exp(-y / beta - shift);
  const double alpha = mean - beta * (shift + std::log(sw / static_cast<double>(sample.size())));
  return finish(FittedDistribution::gumbel(alpha, beta), sample, solve);
}

// Newton on ln k - digamma(k) = ln mean(x) - mean(ln x).
FittedDistribution fit_gamma(std::span<const double> sample, const SolverSettings& settings) {
  const double mean = mean_of(sample);
  double s = 0.0;
  double var = 0.0;
  for (const double x : sample) {
    s -= std::log(x / mean);
    var += (x - mean) * (x - mean);
  }
  s /= static_cast<double>(sample.size());
  var /= static_cast<double>(sample.size());
  if (!(s > 0.0)) throw std::invalid_argument("fit_mle: degenerate sample for gamma");

  auto step = [s](double k) {
    return std::pair{std::log(k) - special::digamma(k) - s, 1.0 / k - special::trigamma(k)};
  };
  const RootSolve solve = solve_positive_root(step, mean * mean / var, false, settings);
  return finish(FittedDistribution::gamma(solve.x, mean / solve.x), sample, solve);
}

// Newton on the shape profile 1/k + mean(ln x) - sum(x^k ln x) / sum(x^k),
// with x scaled by its mean so that x^k stays representable.
FittedDistribution fit_weibull(std::span<const double> sample, const SolverSettings& settings) {
  const double mean = mean_of(sample);
  std::vector<double> log_z;
  log_z.reserve(sample.size());
  for (const double x : sample) log_z.push_back(std::log(x / mean));
  const double log_z_mean = mean_of(log_z);
  const double log_z_max = *std::max_element(log_z.begin(), log_z.end());

  auto weights = [&](double k, double& sw, double& sl, double& sll) {
    sw = sl = sll = 0.0;
    for (const double lz : log_z) {
      const double w = std::exp(k * (lz - log_z_max));
      sw += w;
      sl += w * lz;
      sll += w * lz * lz;
    }
  };
  auto step = [&](double k) {
    double sw = 0.0;
    double sl = 0.0;
    double sll = 0.0;
    weights(k, sw, sl, sll);
    const double m1 = sl / sw;
    const double m2 = sll / sw;
    return std::pair{1.0 / k + log_z_mean - m1, -1.0 / (k * k) - std::max(m2 - m1 * m1, 0.0)};
  };

  const double cv = sample_sd(sample, mean) / mean;
  const RootSolve solve = solve_positive_root(step, std::pow(cv, -1.086), false, settings);
  const double k = solve.x;
  double sw = 0.0;
  double sl = 0.0;
  double sll = 0.0;
  weights(k, sw, sl, sll);
  const double lambda =
      mean * std::exp(log_z_max + std::log(sw / static_cast<double>(sample.size())) / k);
  return finish(FittedDistribution::weibull(k, lambda), sample, solve);
}

// Solves S(x) = p for a decreasing tail function S on (0, inf), starting
// from a close guess. Newton with bisection safeguard.
double invert_tail(const FittedDistribution& fit, double p, double guess) {
  double lo = 0.0;
  double hi = kInf;
  double x = guess > 0.0 && std::isfinite(guess) ? guess : 1.0;
  for (int it = 0; it < 400; ++it) {
    const double residual = exceedance_probability(fit, x) - p;
    if (residual == 0.0) return x;
    (residual > 0.0 ? lo : hi) = x;
    const double density = pdf(fit, x);
    double next = density > 0.0 ? x + residual / density : kInf;
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = std::isinf(hi) ? 2.0 * x : 0.5 * (lo + hi);
    }
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x) return next;
    x = next;
  }
  return x;
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::gamma:
      return "gamma";
    case Family::log_normal:
      return "log_normal";
    case Family::gumbel:
      return "gumbel";
    case Family::weibull:
      return "weibull";
  }
  return "unknown";
}

Family parse_family(std::string_view text) {
  for (const Family f : kAllFamilies) {
    if (text == to_string(f)) return f;
  }
  if (text == "lognormal") return Family::log_normal;
  throw std::invalid_argument(fmt::format("unknown distribution family '{}'", text));
}

std::array<std::string_view, 2> parameter_names(Family family) {
  switch (family) {
    case Family::gamma:
      return {"shape", "scale"};
    case Family::log_normal:
      return {"mu", "sigma"};
    case Family::gumbel:
      return {"alpha", "beta"};
    case Family::weibull:
      return {"shape", "scale"};
  }
  return {"p1", "p2"};
}

FittedDistribution FittedDistribution::gumbel(double location, double scale) {
  FittedDistribution fit{Family::gumbel, {location, scale}};
  fit.validate();
  return fit;
}

FittedDistribution FittedDistribution::log_normal(double mu, double sigma) {
  FittedDistribution fit{Family::log_normal, {mu, sigma}};
  fit.validate();
  return fit;
}

FittedDistribution FittedDistribution::gamma(double shape, double scale) {
  FittedDistribution fit{Family::gamma, {shape, scale}};
  fit.validate();
  return fit;
}

FittedDistribution FittedDistribution::weibull(double shape, double scale) {
  FittedDistribution fit{Family::weibull, {shape, scale}};
  fit.validate();
  return fit;
}

void FittedDistribution::validate() const {
  if (!std::isfinite(params[0]) || !std::isfinite(params[1])) {
    throw std::invalid_argument(fmt::format("{}: non-finite parameter", to_string(family)));
  }
  const bool first_positive = family == Family::gamma || family == Family::weibull;
  if (params[1] <= 0.0 || (first_positive && params[0] <= 0.0)) {
    throw std::invalid_argument(fmt::format("{}: invalid parameters ({}, {})", to_string(family),
                                            params[0], params[1]));
  }
}

bool in_support(Family family, double x) { return family == Family::gumbel || x > 0.0; }

double log_pdf(const FittedDistribution& fit, double x) {
  require_support(fit, x);
  const auto [a, b] = fit.params;
  switch (fit.family) {
    case Family::gumbel: {
      const double z = (x - a) / b;
      return -std::log(b) - z - std::exp(-z);
    }
    case Family::log_normal: {
      const double z = (std::log(x) - a) / b;
      return -0.5 * z * z - std::log(x * b) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    case Family::gamma: {
      const double y = x / b;
      return (a - 1.0) * std::log(y) - y - std::lgamma(a) - std::log(b);
    }
    case Family::weibull: {
      const double y = x / b;
      return std::log(a / b) + (a - 1.0) * std::log(y) - std::pow(y, a);
    }
  }
  return -kInf;
}

double pdf(const FittedDistribution& fit, double x) { return std::exp(log_pdf(fit, x)); }

double cdf(const FittedDistribution& fit, double x) {
  require_support(fit, x);
  const auto [a, b] = fit.params;
  switch (fit.family) {
    case Family::gumbel:
      return std::exp(-std::exp(-(x - a) / b));
    case Family::log_normal:
      return 0.5 * std::erfc(-(std::log(x) - a) / (b * std::numbers::sqrt2));
    case Family::gamma:
      return special::gamma_p(a, x / b);
    case Family::weibull:
      return -std::expm1(-std::pow(x / b, a));
  }
  return 0.0;
}

double exceedance_probability(const FittedDistribution& fit, double x) {
  require_support(fit, x);
  const auto [a, b] = fit.params;
  switch (fit.family) {
    case Family::gumbel:
      return -std::expm1(-std::exp(-(x - a) / b));
    case Family::log_normal:
      return 0.5 * std::erfc((std::log(x) - a) / (b * std::numbers::sqrt2));
    case Family::gamma:
      return special::gamma_q(a, x / b);
    case Family::weibull:
      return std::exp(-std::pow(x / b, a));
  }
  return 0.0;
}

double exceedance_quantile(const FittedDistribution& fit, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error(fmt::format("exceedance_quantile: p = {} outside (0, 1)", p));
  }
  const auto [a, b] = fit.params;
  switch (fit.family) {
    case Family::gumbel:
      return a - b * std::log(-std::log1p(-p));
    case Family::weibull:
      return b * std::pow(-std::log(p), 1.0 / a);
    case Family::log_normal:
      return invert_tail(fit, p, std::exp(a - b * special::normal_quantile(p)));
    case Family::gamma: {
      // Wilson-Hilferty starting point.
      const double z = -special::normal_quantile(p);
      const double c = 1.0 / (9.0 * a);
      const double cube = 1.0 - c + z * std::sqrt(c);
      const double guess = cube > 0.0 ? a * cube * cube * cube * b : 0.5 * a * b;
      return invert_tail(fit, p, guess);
    }
  }
  return 0.0;
}

double log_likelihood(const FittedDistribution& fit, std::span<const double> sample) {
  double sum = 0.0;
  for (const double x : sample) sum += log_pdf(fit, x);
  return sum;
}

FittedDistribution fit_mle(std::span<const double> sample, Family family, const SolverSettings& settings) {
  check_sample(sample, family);
  switch (family) {
    case Family::log_normal:
      return fit_log_normal(sample);
    case Family::gumbel:
      return fit_gumbel(sample, settings);
    case Family::gamma:
      return fit_gamma(sample, settings);
    case Family::weibull:
      return fit_weibull(sample, settings);
  }
  throw std::invalid_argument("fit_mle: unknown family");
}

FittedDistribution fit_gumbel_known_scale(std::span<const double> sample, double scale) {
  if (sample.size() < 2) throw std::invalid_argument("fit_gumbel_known_scale: need at least 2 values");
  if (!(scale > 0.0)) throw std::invalid_argument("fit_gumbel_known_scale: scale must be positive");
  for (const double x : sample) require_finite(x);
  const double mean = mean_of(sample);
  double shift = -kInf;
  for (const double x : sample) shift = std::max(shift, -(x - mean) / scale);
  double sw = 0.0;
  for (const double x : sample) sw += std::exp(-(x - mean) / scale - shift);
  const double alpha = mean - scale * (shift + std::log(sw / static_cast<double>(sample.size())));
  auto fit = FittedDistribution::gumbel(alpha, scale);
  fit.n = sample.size();
  fit.log_likelihood = log_likelihood(fit, sample);
  return fit;
}

std::vector<PlottingPosition> plotting_positions(std::span<const double> sample) {
  if (sample.empty()) throw std::invalid_argument("plotting_positions: empty sample");
  std::vector<std::size_t> order(sample.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sample[i] > sample[j]; });
  const double denom = static_cast<double>(sample.size() + 1);
  std::vector<PlottingPosition> out;
  out.reserve(sample.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    out.push_back({sample[order[r]], r + 1, static_cast<double>(r + 1) / denom});
  }
  return out;
}

}  // namespace surgefreq
