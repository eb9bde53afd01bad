#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "surgefreq/cli.hpp"
#include "surgefreq/synthgen.hpp"

namespace surgefreq::cli {

namespace {

struct FitOptions {
  std::string file;
  std::string family = "gumbel";
  std::string format = "csv";
  double alpha = kDefaultAlpha;
  std::string plot;
};

struct ScanOptions {
  std::string config;
  std::vector<std::pair<std::string, std::string>> settings;  // flag overrides, in order
  std::vector<std::string> covariates;
  std::vector<std::string> monthly_covariates;
  std::string correlate_with;
};

struct GenerateOptions {
  std::string family = "gumbel";
  double param1 = 600.0;
  double param1_slope = 0.0;
  double param2 = 50.0;
  double param2_slope = 0.0;
  int first_year = 1901;
  int last_year = 2007;
  std::string gaps;
  std::uint64_t seed = 1;
  std::string station = "synthetic";
  std::string kind = "annual_maximum";
  std::string out;
};

struct InfillOptions {
  std::string target;
  std::string target_format = "csv";
  double target_offset_cm = 0.0;
  std::string reference;
  std::string reference_format = "csv";
  double reference_offset_cm = 0.0;
  std::string kind = "annual_mean";
  std::string years;
  std::string overlap;
  std::string out;
};

AnnualSeries renamed(const AnnualSeries& series, const std::string& id) {
  return AnnualSeries(id, series.kind(),
                      std::vector<Observation>(series.observations().begin(), series.observations().end()));
}

AnnualSeries load_series(const std::filesystem::path& path, const std::string& format, double offset_cm,
                         SeriesKind csv_kind) {
  if (format == "psmsl") return load_psmsl_annual(path, offset_cm);
  if (format != "csv") throw ConfigError(fmt::format("unknown input format '{}'", format));
  return load_annual_csv(path, csv_kind);
}

// Flags that map one-to-one onto config keys.
void add_setting_option(CLI::App* cmd, ScanOptions& opts, const std::string& flag, const std::string& key,
                        const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&opts, key](const std::string& v) { opts.settings.emplace_back(key, v); }, help);
}

void add_scan_options(CLI::App* cmd, ScanOptions& opts) {
  cmd->add_option("--config", opts.config, "Configuration file (key = value)");
  add_setting_option(cmd, opts, "--station", "station", "Station identifier");
  add_setting_option(cmd, opts, "--maxima", "maxima", "Annual maxima CSV (year,value)");
  add_setting_option(cmd, opts, "--means", "means", "Annual mean sea levels (covariate 'msl')");
  add_setting_option(cmd, opts, "--means-format", "means_format", "csv or psmsl");
  add_setting_option(cmd, opts, "--means-offset-cm", "means_offset_cm", "Datum offset added to PSMSL means");
  add_setting_option(cmd, opts, "--window", "window", "Window length in observations");
  add_setting_option(cmd, opts, "--probabilities", "probabilities", "Comma-separated exceedance levels");
  add_setting_option(cmd, opts, "--policy", "policy", "fixed_gumbel or best_aic");
  add_setting_option(cmd, opts, "--alpha", "alpha", "Significance level");
  add_setting_option(cmd, opts, "--reduction", "reduction", "Windowed covariate reduction: mean or max");
  add_setting_option(cmd, opts, "--output", "output", "Output directory");
  add_setting_option(cmd, opts, "--threads", "threads", "Worker threads for the window scan");
  add_setting_option(cmd, opts, "--infill-reference", "infill.reference", "Reference series for infilling means");
  add_setting_option(cmd, opts, "--infill-years", "infill.years", "Years to infill in the means series");
  add_setting_option(cmd, opts, "--infill-overlap", "infill.overlap", "Regression period FIRST-LAST");
  cmd->add_option("--covariate", opts.covariates, "Annual covariate NAME=PATH");
  cmd->add_option("--monthly-covariate", opts.monthly_covariates, "Monthly covariate NAME=PATH (annual max)");
}

RunConfig resolve_config(const ScanOptions& opts) {
  RunConfig config = opts.config.empty() ? RunConfig{} : load_config(opts.config);
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') config.output_dir = env;
  for (const auto& [key, value] : opts.settings) apply_setting(config, key, value, {});
  auto add_covariates = [&](const std::vector<std::string>& specs, const std::string& prefix) {
    for (const auto& s : specs) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("covariate '{}': expected NAME=PATH", s));
      apply_setting(config, prefix + s.substr(0, eq), s.substr(eq + 1), {});
    }
  };
  add_covariates(opts.covariates, "covariate.");
  add_covariates(opts.monthly_covariates, "monthly_covariate.");

  if (config.maxima.empty()) throw ConfigError("no maxima file configured");
  if (config.station.empty()) config.station = config.maxima.stem().string();
  if (config.means_infill && !config.means) throw ConfigError("infill directive given without a means series");
  try {
    config.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return config;
}

struct Inputs {
  AnnualSeries maxima;
  std::vector<AnnualSeries> covariates;
};

Inputs load_inputs(const RunConfig& config, std::ostream& out) {
  Inputs inputs{load_annual_csv(config.maxima, SeriesKind::annual_maximum, config.station), {}};
  if (config.means) {
    auto means = load_series(*config.means, config.means_format, config.means_offset_cm, SeriesKind::annual_mean);
    if (const auto& fill = config.means_infill) {
      const auto reference =
          load_series(fill->reference, fill->reference_format, fill->reference_offset_cm, means.kind());
      auto [filled, report] = infill_by_regression(means, reference, fill->years, fill->overlap);
      fmt::print(out, "infilled {} year(s) of {}: value = {:.4f} + {:.4f} * reference (R^2 {:.3f}, {} years)\n",
                 report.filled_years.size(), kMeanSeaLevel, report.regression_intercept,
                 report.regression_slope, report.r_squared_of_fit, report.overlap_years);
      means = std::move(filled);
    }
    inputs.covariates.push_back(renamed(means, kMeanSeaLevel));
  }
  for (const auto& source : config.covariates) {
    const bool taken = std::any_of(inputs.covariates.begin(), inputs.covariates.end(),
                                   [&](const AnnualSeries& s) { return s.station_id() == source.name; });
    if (taken) throw ConfigError(fmt::format("covariate name '{}' used twice", source.name));
    inputs.covariates.push_back(source.monthly
                                    ? renamed(annual_max_of_monthly(load_monthly_csv(source.path)), source.name)
                                    : load_annual_csv(source.path, SeriesKind::covariate_index, source.name));
  }
  return inputs;
}

// Writes every file or none: on failure, files already written are removed.
void write_outputs(const std::filesystem::path& dir,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files) {
      const auto path = dir / name;
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      if (!f) throw InputError(fmt::format("cannot write '{}'", path.string()));
      written.push_back(path);
      f << content;
      f.close();
      if (!f) throw InputError(fmt::format("write to '{}' failed", path.string()));
    }
  } catch (...) {
    std::error_code ignored;
    for (const auto& path : written) std::filesystem::remove(path, ignored);
    throw;
  }
}

// Runs `body`, mapping exceptions onto exit codes: input and configuration
// problems give 2, numerical failures give 3.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInput;
  } catch (const InputError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  }
}

int cmd_fit(const FitOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<double> values;
  Family family = Family::gumbel;
  const int load_status = guarded(err, [&] {
    family = parse_family(opts.family);
    // Raw sample: support checks belong to the fit, not to the loader.
    values = load_series(opts.file, opts.format, 0.0, SeriesKind::covariate_index).values();
    return kExitOk;
  });
  if (load_status != kExitOk) return load_status;

  FittedDistribution fit;
  TestVerdict ks;
  AicScore score;
  try {
    fit = fit_mle(values, family);
    ks = ks_statistic(values, fit, opts.alpha);
    score = aic(fit, values);
  } catch (const std::exception& e) {
    fmt::print(err, "fit failed: {}\n", e.what());
    return kExitNumerical;
  }

  const auto names = parameter_names(family);
  fmt::print(out, "family: {}\nn: {}\n", to_string(family), values.size());
  fmt::print(out, "{}: {:.4f}\n{}: {:.4f}\n", names[0], fit.params[0], names[1], fit.params[1]);
  fmt::print(out, "log_likelihood: {:.3f}\niterations: {}\n", fit.log_likelihood, fit.iterations);
  fmt::print(out, "ks_statistic: {:.3f} critical: {:.3f} {}\n", ks.statistic, ks.critical_value,
             ks.passed ? "pass" : "FAIL");
  fmt::print(out, "aic: {:.1f}\n", score.value);

  if (!opts.plot.empty()) {
    return guarded(err, [&] {
      const std::filesystem::path path(opts.plot);
      write_outputs(path.parent_path().empty() ? "." : path.parent_path(),
                    {{path.filename().string(), plot_csv(values, fit)}});
      fmt::print(out, "plot data: {}\n", path.string());
      return kExitOk;
    });
  }
  return kExitOk;
}

int cmd_scan(const ScanOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig config;
  std::optional<Inputs> inputs;
  const int status = guarded(err, [&] {
    config = resolve_config(opts);
    inputs.emplace(load_inputs(config, out));
    if (inputs->maxima.size() < config.spec.length + 2) {
      throw ConfigError(fmt::format("{}: {} observations give fewer than 3 windows of {}", config.station,
                                    inputs->maxima.size(), config.spec.length));
    }
    return kExitOk;
  });
  if (status != kExitOk) return status;

  ScanResult result;
  std::vector<TrendRow> trends;
  try {
    result = scan(inputs->maxima, config.spec, inputs->covariates, config.threads);
    trends = quantile_trend_table(result, config.spec);
  } catch (const std::exception& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  }

  return guarded(err, [&] {
    write_outputs(config.output_dir, {{"windows.csv", windows_csv(result, config.spec)},
                                      {"summary.csv", summary_csv(result, config.spec)},
                                      {"trends.csv", trends_csv(trends)}});
    fmt::print(out, "{}: {} observations, {} windows of {}; wrote windows.csv, summary.csv, trends.csv to {}\n",
               config.station, inputs->maxima.size(), result.windows.size(), config.spec.length,
               config.output_dir.string());
    return kExitOk;
  });
}

int cmd_correlate(const ScanOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig config;
  std::optional<Inputs> inputs;
  const int status = guarded(err, [&] {
    config = resolve_config(opts);
    inputs.emplace(load_inputs(config, out));
    const bool self = opts.correlate_with == "@alpha";
    const bool known = std::any_of(inputs->covariates.begin(), inputs->covariates.end(),
                                   [&](const AnnualSeries& s) { return s.station_id() == opts.correlate_with; });
    if (!self && !known) throw ConfigError(fmt::format("covariate '{}' is not configured", opts.correlate_with));
    return kExitOk;
  });
  if (status != kExitOk) return status;

  ScanResult result;
  try {
    result = scan(inputs->maxima, config.spec, inputs->covariates, config.threads);
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  }

  return guarded(err, [&] {
    std::vector<CovariateCorrelation> rows;
    std::string file;
    if (opts.correlate_with == "@alpha") {
      std::vector<std::optional<double>> self;
      for (const auto& w : result.windows) self.emplace_back(w.location_alpha);
      rows = covariate_correlation_table(result, self, "alpha_self", config.spec);
      file = "correlation_alpha_self.csv";
    } else {
      rows = covariate_correlation_table(result, opts.correlate_with, config.spec);
      file = "correlation_" + opts.correlate_with + ".csv";
    }
    const auto csv = correlation_csv(rows);
    write_outputs(config.output_dir, {{file, csv}});
    out << csv;
    return kExitOk;
  });
}

int cmd_generate(const GenerateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    DriftModel model;
    model.family = parse_family(opts.family);
    model.param1 = {opts.param1, opts.param1_slope};
    model.param2 = {opts.param2, opts.param2_slope};
    model.first_year = opts.first_year;
    model.last_year = opts.last_year;
    model.gap_years = opts.gaps.empty() ? std::vector<int>{} : parse_year_list(opts.gaps);
    model.seed = opts.seed;
    model.station_id = opts.station;
    model.kind = parse_series_kind(opts.kind);
    const auto series = generate(model);
    if (opts.out.empty()) {
      write_annual_csv(out, series);
    } else {
      save_annual_csv(opts.out, series);
      fmt::print(out, "wrote {} observations to {}\n", series.size(), opts.out);
    }
    return kExitOk;
  });
}

int cmd_infill(const InfillOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SeriesKind kind = parse_series_kind(opts.kind);
    const auto target = load_series(opts.target, opts.target_format, opts.target_offset_cm, kind);
    const auto reference = load_series(opts.reference, opts.reference_format, opts.reference_offset_cm, kind);
    std::optional<YearRange> overlap;
    if (!opts.overlap.empty()) overlap = parse_year_range(opts.overlap);
    const auto years = parse_year_list(opts.years);
    auto [filled, report] = infill_by_regression(target, reference, years, overlap);
    std::ostream& info = opts.out.empty() ? err : out;
    fmt::print(info, "slope: {:.6f}\nintercept: {:.6f}\nr_squared: {:.4f}\noverlap_years: {}\n",
               report.regression_slope, report.regression_intercept, report.r_squared_of_fit,
               report.overlap_years);
    for (const int y : report.filled_years) fmt::print(info, "filled {}: {:.1f}\n", y, *filled.at(y));
    if (opts.out.empty()) {
      write_annual_csv(out, filled);
    } else {
      save_annual_csv(opts.out, filled);
    }
    return kExitOk;
  });
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moving-window frequency analysis of annual maximum water levels", "surgefreq"};
  app.require_subcommand(1);

  FitOptions fit_opts;
  auto* fit = app.add_subcommand("fit", "Fit one family to a sample, with K-S and AIC");
  fit->add_option("file", fit_opts.file, "Sample file (year,value CSV)")->required();
  fit->add_option("--family", fit_opts.family, "gamma, log_normal, gumbel or weibull");
  fit->add_option("--format", fit_opts.format, "csv or psmsl");
  fit->add_option("--alpha", fit_opts.alpha, "Significance level for the K-S verdict");
  fit->add_option("--plot", fit_opts.plot, "Write empirical vs. fitted return levels to this CSV");

  ScanOptions scan_opts;
  auto* scan_cmd = app.add_subcommand("scan", "Moving-window analysis: windows.csv, summary.csv, trends.csv");
  add_scan_options(scan_cmd, scan_opts);

  ScanOptions corr_opts;
  auto* corr = app.add_subcommand("correlate", "R^2 of windowed quantiles and parameters against a covariate");
  add_scan_options(corr, corr_opts);
  corr->add_option("--with", corr_opts.correlate_with, "Covariate name (msl, a covariate name, or @alpha)")
      ->required();

  GenerateOptions gen_opts;
  auto* gen = app.add_subcommand("generate", "Synthetic annual series with drifting parameters");
  gen->add_option("--family", gen_opts.family);
  gen->add_option("--param1", gen_opts.param1, "First parameter at the first year");
  gen->add_option("--param1-slope", gen_opts.param1_slope, "Change of the first parameter per year");
  gen->add_option("--param2", gen_opts.param2, "Second parameter at the first year");
  gen->add_option("--param2-slope", gen_opts.param2_slope, "Change of the second parameter per year");
  gen->add_option("--first-year", gen_opts.first_year);
  gen->add_option("--last-year", gen_opts.last_year);
  gen->add_option("--gaps", gen_opts.gaps, "Comma-separated gap years");
  gen->add_option("--seed", gen_opts.seed);
  gen->add_option("--station", gen_opts.station);
  gen->add_option("--kind", gen_opts.kind, "annual_maximum, annual_mean or covariate_index");
  gen->add_option("--out", gen_opts.out, "Output CSV (stdout when omitted)");

  InfillOptions infill_opts;
  auto* infill = app.add_subcommand("infill", "Fill missing years by regression on a reference station");
  infill->add_option("--target", infill_opts.target)->required();
  infill->add_option("--target-format", infill_opts.target_format, "csv or psmsl");
  infill->add_option("--target-offset-cm", infill_opts.target_offset_cm);
  infill->add_option("--reference", infill_opts.reference)->required();
  infill->add_option("--reference-format", infill_opts.reference_format, "csv or psmsl");
  infill->add_option("--reference-offset-cm", infill_opts.reference_offset_cm);
  infill->add_option("--kind", infill_opts.kind, "Series kind of CSV inputs");
  infill->add_option("--years", infill_opts.years, "Comma-separated years to fill")->required();
  infill->add_option("--overlap", infill_opts.overlap, "Regression period FIRST-LAST");
  infill->add_option("--out", infill_opts.out, "Output CSV (stdout when omitted)");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (fit->parsed()) return cmd_fit(fit_opts, out, err);
  if (scan_cmd->parsed()) return cmd_scan(scan_opts, out, err);
  if (corr->parsed()) return cmd_correlate(corr_opts, out, err);
  if (gen->parsed()) return cmd_generate(gen_opts, out, err);
  return cmd_infill(infill_opts, out, err);
}

}  // namespace surgefreq::cli
