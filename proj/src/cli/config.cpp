#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>

#include <fmt/format.h>

#include "surgefreq/cli.hpp"

namespace surgefreq::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    const auto item = trim(text.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (!item.empty()) items.push_back(item);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return items;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("{}: cannot parse '{}'", key, text));
  }
  return value;
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

std::string check_format(const std::string& key, const std::string& value) {
  if (value != "csv" && value != "psmsl") throw ConfigError(fmt::format("{}: expected csv or psmsl", key));
  return value;
}

InfillDirective& infill(RunConfig& config) {
  if (!config.means_infill) config.means_infill.emplace();
  return *config.means_infill;
}

}  // namespace

std::vector<double> parse_probability_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_value<double>("probabilities", item));
  if (out.empty()) throw ConfigError("probabilities: empty list");
  return out;
}

std::vector<int> parse_year_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) out.push_back(parse_value<int>("years", item));
  return out;
}

YearRange parse_year_range(const std::string& text) {
  const auto dash = text.find('-', 1);
  if (dash == std::string::npos) throw ConfigError(fmt::format("year range '{}': expected FIRST-LAST", text));
  YearRange range{parse_value<int>("year range", trim(text.substr(0, dash))),
                  parse_value<int>("year range", trim(text.substr(dash + 1)))};
  if (range.last < range.first) throw ConfigError(fmt::format("year range '{}' is reversed", text));
  return range;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir) {
  try {
    if (key == "station") {
      config.station = value;
    } else if (key == "maxima") {
      config.maxima = resolve(base_dir, value);
    } else if (key == "means") {
      config.means = resolve(base_dir, value);
    } else if (key == "means_format") {
      config.means_format = check_format(key, value);
    } else if (key == "means_offset_cm") {
      config.means_offset_cm = parse_value<double>(key, value);
    } else if (key.starts_with("covariate.")) {
      config.covariates.push_back({key.substr(10), resolve(base_dir, value), false});
    } else if (key.starts_with("monthly_covariate.")) {
      config.covariates.push_back({key.substr(18), resolve(base_dir, value), true});
    } else if (key == "window") {
      config.spec.length = parse_value<std::size_t>(key, value);
    } else if (key == "probabilities") {
      config.spec.probabilities = parse_probability_list(value);
    } else if (key == "policy") {
      config.spec.policy = parse_family_policy(value);
    } else if (key == "alpha") {
      config.spec.alpha = parse_value<double>(key, value);
    } else if (key == "reduction") {
      config.spec.covariate_reduction = parse_covariate_reduction(value);
    } else if (key == "covariate_tolerance") {
      config.spec.covariate_missing_tolerance = parse_value<double>(key, value);
    } else if (key == "output") {
      config.output_dir = resolve(base_dir, value);
    } else if (key == "threads") {
      config.threads = parse_value<unsigned>(key, value);
    } else if (key == "infill.reference") {
      infill(config).reference = resolve(base_dir, value);
    } else if (key == "infill.reference_format") {
      infill(config).reference_format = check_format(key, value);
    } else if (key == "infill.reference_offset_cm") {
      infill(config).reference_offset_cm = parse_value<double>(key, value);
    } else if (key == "infill.years") {
      infill(config).years = parse_year_list(value);
    } else if (key == "infill.overlap") {
      infill(config).overlap = parse_year_range(value);
    } else {
      throw ConfigError(fmt::format("unknown setting '{}'", key));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: {}", key, e.what()));
  }
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected key = value", line_no));
    apply_setting(config, trim(text.substr(0, eq)), trim(text.substr(eq + 1)), base_dir);
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  return parse_config(in, path.parent_path());
}

}  // namespace surgefreq::cli
