#include "surgefreq/windowscan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include <fmt/format.h>

namespace surgefreq {

namespace {

FamilyOutcome fit_family(Family family, std::span<const double> values, const WindowSpec& spec) {
  FamilyOutcome outcome;
  outcome.family = family;
  try {
    if (family == Family::gumbel && spec.known_gumbel_scale) {
      outcome.fit = fit_gumbel_known_scale(values, *spec.known_gumbel_scale);
    } else {
      outcome.fit = fit_mle(values, family);
    }
  } catch (const NonConvergenceError& e) {
    outcome.fit = e.last;
    outcome.failure = e.what();
    return outcome;
  } catch (const std::exception& e) {
    outcome.failure = e.what();
    return outcome;
  }
  try {
    outcome.ks = ks_statistic(values, *outcome.fit, spec.alpha);
    outcome.aic = aic(*outcome.fit, values);
  } catch (const std::exception& e) {
    outcome.ks.reset();
    outcome.aic.reset();
    outcome.failure = e.what();
  }
  return outcome;
}

Family select_family(const std::array<FamilyOutcome, 4>& families, FamilyPolicy policy) {
  if (policy == FamilyPolicy::fixed_gumbel) return Family::gumbel;
  const FamilyOutcome* best = nullptr;
  for (const auto& outcome : families) {
    if (!outcome.usable()) continue;
    if (best == nullptr || outcome.aic->value < best->aic->value) best = &outcome;
  }
  if (best == nullptr) throw AnalysisError("analyze_window: no family could be fitted");
  return best->family;
}

}  // namespace

std::string_view to_string(FamilyPolicy policy) {
  return policy == FamilyPolicy::fixed_gumbel ? "fixed_gumbel" : "best_aic";
}

FamilyPolicy parse_family_policy(std::string_view text) {
  if (text == "fixed_gumbel") return FamilyPolicy::fixed_gumbel;
  if (text == "best_aic") return FamilyPolicy::best_aic;
  throw std::invalid_argument(fmt::format("unknown family policy '{}'", text));
}

std::string_view to_string(CovariateReduction reduction) {
  return reduction == CovariateReduction::mean ? "mean" : "max";
}

CovariateReduction parse_covariate_reduction(std::string_view text) {
  if (text == "mean") return CovariateReduction::mean;
  if (text == "max") return CovariateReduction::max;
  throw std::invalid_argument(fmt::format("unknown covariate reduction '{}'", text));
}

std::vector<double> default_probabilities() {
  return {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.10, 0.20, 0.50, 0.75, 0.99};
}

void WindowSpec::validate() const {
  if (length < 10) throw std::invalid_argument("window length must be at least 10");
  if (probabilities.empty()) throw std::invalid_argument("no exceedance probabilities given");
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities[i];
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument(fmt::format("probability {} outside (0, 1)", p));
    if (i > 0 && !(p > probabilities[i - 1])) {
      throw std::invalid_argument("probabilities must be strictly increasing");
    }
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(covariate_missing_tolerance >= 0.0 && covariate_missing_tolerance < 1.0)) {
    throw std::invalid_argument("covariate missing tolerance must lie in [0, 1)");
  }
  if (known_gumbel_scale && !(*known_gumbel_scale > 0.0)) {
    throw std::invalid_argument("known Gumbel scale must be positive");
  }
}

std::optional<double> WindowResult::quantile(double probability) const {
  for (const auto& q : quantiles) {
    if (q.probability == probability) return q.level_cm;
  }
  return std::nullopt;
}

std::vector<Window> make_windows(const AnnualSeries& series, std::size_t length) {
  if (length == 0) throw std::invalid_argument("make_windows: zero window length");
  if (series.size() < length) {
    throw std::invalid_argument(fmt::format("make_windows: {} has {} observations, window needs {}",
                                            series.station_id(), series.size(), length));
  }
  const auto obs = series.observations();
  std::vector<Window> windows;
  windows.reserve(obs.size() - length + 1);
  for (std::size_t start = 0; start + length <= obs.size(); ++start) {
    Window w;
    w.start_year = obs[start].year;
    w.years.reserve(length);
    w.values.reserve(length);
    for (std::size_t i = start; i < start + length; ++i) {
      w.years.push_back(obs[i].year);
      w.values.push_back(obs[i].value);
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

std::optional<double> window_covariate(const AnnualSeries& covariate, std::span<const int> years,
                                       const WindowSpec& spec) {
  if (years.empty()) return std::nullopt;
  std::vector<double> present;
  present.reserve(years.size());
  for (const int year : years) {
    if (const auto v = covariate.at(year)) present.push_back(*v);
  }
  const double missing = static_cast<double>(years.size() - present.size());
  if (present.empty() ||
      missing > spec.covariate_missing_tolerance * static_cast<double>(years.size()) + 1e-9) {
    return std::nullopt;
  }
  if (spec.covariate_reduction == CovariateReduction::max) {
    return *std::max_element(present.begin(), present.end());
  }
  double sum = 0.0;
  for (const double v : present) sum += v;
  return sum / static_cast<double>(present.size());
}

WindowResult analyze_window(const Window& window, const WindowSpec& spec,
                            std::span<const AnnualSeries> covariates) {
  if (window.values.size() != spec.length || window.years.size() != spec.length) {
    throw std::invalid_argument(fmt::format("analyze_window: window of {} values, spec length {}",
                                            window.values.size(), spec.length));
  }
  WindowResult result;
  result.start_year = window.start_year;
  result.years = window.years;
  result.values = window.values;

  try {
    result.runs = runs_test(window.values, spec.alpha);
  } catch (const std::invalid_argument&) {
    result.runs.reset();
  }
  try {
    result.stationarity = stationarity_t_test(window.values, spec.alpha);
  } catch (const std::invalid_argument&) {
    result.stationarity.reset();
  }

  for (const Family family : kAllFamilies) {
    result.families[index_of(family)] = fit_family(family, window.values, spec);
  }

  const FamilyOutcome& gumbel = result.outcome(Family::gumbel);
  if (!gumbel.usable()) {
    throw AnalysisError(fmt::format("window {}: Gumbel fit failed: {}", window.start_year, gumbel.failure));
  }
  result.location_alpha = gumbel.fit->params[0];
  result.scale_beta = gumbel.fit->params[1];

  result.selected_family = select_family(result.families, spec.policy);
  const FittedDistribution& selected = *result.outcome(result.selected_family).fit;
  result.quantiles.reserve(spec.probabilities.size());
  for (const double p : spec.probabilities) {
    result.quantiles.push_back({p, exceedance_quantile(selected, p)});
  }

  for (const auto& covariate : covariates) {
    result.covariates[covariate.station_id()] = window_covariate(covariate, window.years, spec);
  }
  return result;
}

std::array<FamilySummary, 4> summarize(std::span<const WindowResult> windows) {
  std::array<FamilySummary, 4> summary;
  std::array<double, 4> aic_sum{};
  for (const Family f : kAllFamilies) summary[index_of(f)].family = f;

  for (const auto& window : windows) {
    double best = std::numeric_limits<double>::infinity();
    std::optional<Family> best_family;
    bool tie = false;
    for (const auto& outcome : window.families) {
      if (!outcome.usable()) continue;
      auto& s = summary[index_of(outcome.family)];
      ++s.usable_windows;
      s.max_ks = std::max(s.max_ks, outcome.ks->statistic);
      if (!outcome.ks->passed) ++s.ks_failures;
      aic_sum[index_of(outcome.family)] += outcome.aic->value;
      if (outcome.aic->value < best) {
        best = outcome.aic->value;
        best_family = outcome.family;
        tie = false;
      } else if (outcome.aic->value == best) {
        tie = true;
      }
    }
    if (best_family && !tie) ++summary[index_of(*best_family)].lowest_aic_count;
  }
  for (auto& s : summary) {
    s.mean_aic = s.usable_windows > 0 ? aic_sum[index_of(s.family)] / static_cast<double>(s.usable_windows)
                                      : std::numeric_limits<double>::quiet_NaN();
  }
  return summary;
}

ScanResult scan(const AnnualSeries& series, const WindowSpec& spec, std::span<const AnnualSeries> covariates,
                unsigned threads) {
  spec.validate();
  const auto windows = make_windows(series, spec.length);
  ScanResult result;
  result.station_id = series.station_id();
  result.windows.resize(windows.size());

  if (threads <= 1 || windows.size() < 2) {
    for (std::size_t i = 0; i < windows.size(); ++i) {
      result.windows[i] = analyze_window(windows[i], spec, covariates);
    }
  } else {
    std::vector<std::exception_ptr> errors(windows.size());
    std::atomic<std::size_t> next{0};
    {
      std::vector<std::jthread> pool;
      const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(windows.size()));
      for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < windows.size(); i = next++) {
            try {
              result.windows[i] = analyze_window(windows[i], spec, covariates);
            } catch (...) {
              errors[i] = std::current_exception();
            }
          }
        });
      }
    }
    for (const auto& error : errors) {
      if (error) std::rethrow_exception(error);
    }
  }

  result.summary = summarize(result.windows);
  return result;
}

}  // namespace surgefreq
