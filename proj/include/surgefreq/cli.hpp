#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "surgefreq/series.hpp"
#include "surgefreq/trendcorr.hpp"
#include "surgefreq/windowscan.hpp"

namespace surgefreq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "SURGEFREQ_OUTPUT_DIR";

/// Raised for invalid or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CovariateSource {
  std::string name;
  std::filesystem::path path;
  bool monthly = false;  // monthly CSV reduced to annual maxima
};

struct InfillDirective {
  std::filesystem::path reference;
  std::string reference_format = "csv";  // csv | psmsl
  double reference_offset_cm = 0.0;
  std::vector<int> years;
  std::optional<YearRange> overlap;
};

struct RunConfig {
  std::string station;
  std::filesystem::path maxima;
  std::optional<std::filesystem::path> means;
  std::string means_format = "csv";  // csv | psmsl
  double means_offset_cm = 0.0;
  std::optional<InfillDirective> means_infill;
  std::vector<CovariateSource> covariates;
  WindowSpec spec;
  std::filesystem::path output_dir = ".";
  unsigned threads = 1;
};

/// Name under which the mean-sea-level series appears as a covariate.
inline constexpr const char* kMeanSeaLevel = "msl";

/// Parses the flat `key = value` config format. Relative paths are resolved
/// against `base_dir`. Throws ConfigError.
[[nodiscard]] RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Applies one `key = value` setting; shared by the config file and flags.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir);

[[nodiscard]] std::vector<double> parse_probability_list(const std::string& text);
[[nodiscard]] std::vector<int> parse_year_list(const std::string& text);
[[nodiscard]] YearRange parse_year_range(const std::string& text);

// CSV reports. Column order and precision are fixed: cm to 0.1, mm/yr to
// 0.01, R^2 to 0.01, test statistics to 0.001, probabilities as given.
[[nodiscard]] std::string windows_csv(const ScanResult& scan, const WindowSpec& spec);
[[nodiscard]] std::string summary_csv(const ScanResult& scan, const WindowSpec& spec);
[[nodiscard]] std::string trends_csv(const std::vector<TrendRow>& rows);
[[nodiscard]] std::string correlation_csv(const std::vector<CovariateCorrelation>& rows);
/// Empirical vs. fitted return levels at the Weibull plotting positions,
/// sorted by ascending exceedance probability.
[[nodiscard]] std::string plot_csv(std::span<const double> sample, const FittedDistribution& fit);

/// Runs the command line (arguments without the program name). Returns the
/// process exit code.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace surgefreq::cli
