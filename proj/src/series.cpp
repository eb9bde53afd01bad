#include "surgefreq/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace surgefreq {

namespace {

constexpr std::size_t kMinInfillOverlap = 10;
constexpr double kPsmslMissing = -99999.0;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

bool is_water_level(SeriesKind kind) {
  return kind == SeriesKind::annual_maximum || kind == SeriesKind::annual_mean;
}

// Header lines start with a non-numeric first field.
bool looks_like_header(std::string_view first_field) {
  return !parse_number<double>(first_field).has_value();
}

}  // namespace

std::string_view to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::annual_maximum:
      return "annual_maximum";
    case SeriesKind::annual_mean:
      return "annual_mean";
    case SeriesKind::covariate_index:
      return "covariate_index";
  }
  return "unknown";
}

SeriesKind parse_series_kind(std::string_view text) {
  if (text == "annual_maximum") return SeriesKind::annual_maximum;
  if (text == "annual_mean") return SeriesKind::annual_mean;
  if (text == "covariate_index") return SeriesKind::covariate_index;
  throw InputError(fmt::format("unknown series kind '{}'", text));
}

AnnualSeries::AnnualSeries(std::string station_id, SeriesKind kind, std::vector<Observation> observations)
    : station_id_(std::move(station_id)), kind_(kind), observations_(std::move(observations)) {
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    const auto& obs = observations_[i];
    if (i > 0 && obs.year <= observations_[i - 1].year) {
      throw InputError(obs.year == observations_[i - 1].year
                           ? fmt::format("{}: duplicate year {}", station_id_, obs.year)
                           : fmt::format("{}: years not increasing at {}", station_id_, obs.year));
    }
    if (!std::isfinite(obs.value)) {
      throw InputError(fmt::format("{}: non-finite value in year {}", station_id_, obs.year));
    }
    if (is_water_level(kind_) && obs.value <= 0.0) {
      throw InputError(fmt::format("{}: non-positive water level {} in year {}", station_id_,
                                   obs.value, obs.year));
    }
  }
}

std::vector<int> AnnualSeries::years() const {
  std::vector<int> out;
  out.reserve(observations_.size());
  for (const auto& obs : observations_) out.push_back(obs.year);
  return out;
}

std::vector<double> AnnualSeries::values() const {
  std::vector<double> out;
  out.reserve(observations_.size());
  for (const auto& obs : observations_) out.push_back(obs.value);
  return out;
}

std::optional<double> AnnualSeries::at(int year) const {
  const auto it = std::lower_bound(observations_.begin(), observations_.end(), year,
                                   [](const Observation& o, int y) { return o.year < y; });
  if (it == observations_.end() || it->year != year) return std::nullopt;
  return it->value;
}

MonthlySeries::MonthlySeries(std::string label, std::vector<MonthlyObservation> observations)
    : label_(std::move(label)), observations_(std::move(observations)) {
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    const auto& obs = observations_[i];
    if (obs.month < 1 || obs.month > 12) {
      throw InputError(fmt::format("{}: month {} out of range in {}", label_, obs.month, obs.year));
    }
    if (!std::isfinite(obs.value)) {
      throw InputError(fmt::format("{}: non-finite value in {}-{:02}", label_, obs.year, obs.month));
    }
    if (i > 0) {
      const auto& prev = observations_[i - 1];
      if (std::pair{obs.year, obs.month} <= std::pair{prev.year, prev.month}) {
        throw InputError(fmt::format("{}: (year, month) not strictly increasing at {}-{:02}", label_,
                                     obs.year, obs.month));
      }
    }
  }
}

AnnualSeries read_annual_csv(std::istream& in, SeriesKind kind, std::string station_id) {
  std::vector<Observation> observations;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split(text, ',');
    if (line_no == 1 && looks_like_header(fields[0])) continue;
    if (fields.size() != 2) {
      throw InputError(fmt::format("{}: line {}: expected `year,value`", station_id, line_no));
    }
    const auto year = parse_number<int>(fields[0]);
    if (!year) throw InputError(fmt::format("{}: line {}: bad year '{}'", station_id, line_no, fields[0]));
    if (fields[1].empty()) continue;  // gap
    const auto value = parse_number<double>(fields[1]);
    if (!value) throw InputError(fmt::format("{}: line {}: bad value '{}'", station_id, line_no, fields[1]));
    observations.push_back({*year, *value});
  }
  return AnnualSeries(std::move(station_id), kind, std::move(observations));
}

AnnualSeries load_annual_csv(const std::filesystem::path& path, SeriesKind kind) {
  return load_annual_csv(path, kind, path.stem().string());
}

AnnualSeries load_annual_csv(const std::filesystem::path& path, SeriesKind kind, std::string station_id) {
  auto in = open_input(path);
  return read_annual_csv(in, kind, std::move(station_id));
}

void write_annual_csv(std::ostream& out, const AnnualSeries& series) {
  out << "year,value\n";
  for (const auto& obs : series.observations()) out << fmt::format("{},{}\n", obs.year, obs.value);
}

void save_annual_csv(const std::filesystem::path& path, const AnnualSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  write_annual_csv(out, series);
  if (!out) throw InputError(fmt::format("write to '{}' failed", path.string()));
}

AnnualSeries read_psmsl_annual(std::istream& in, double datum_offset_cm, std::string station_id) {
  std::vector<Observation> observations;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text, ';');
    const auto year = parse_number<int>(fields[0]);
    const auto mm = fields.size() >= 2 ? parse_number<double>(fields[1]) : std::nullopt;
    if (fields.size() < 2 || fields.size() > 4 || !year || !mm) {
      throw InputError(fmt::format("{}: line {}: malformed PSMSL row '{}'", station_id, line_no, text));
    }
    ++rows;
    if (*mm == kPsmslMissing) continue;
    observations.push_back({*year, *mm / 10.0 + datum_offset_cm});
  }
  if (observations.empty()) {
    throw InputError(fmt::format("{}: no valid PSMSL rows ({} read, all missing)", station_id, rows));
  }
  return AnnualSeries(std::move(station_id), SeriesKind::annual_mean, std::move(observations));
}

AnnualSeries load_psmsl_annual(const std::filesystem::path& path, double datum_offset_cm) {
  auto in = open_input(path);
  return read_psmsl_annual(in, datum_offset_cm, path.stem().string());
}

MonthlySeries read_monthly_csv(std::istream& in, std::string label) {
  std::vector<MonthlyObservation> observations;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split(text, ',');
    if (line_no == 1 && looks_like_header(fields[0])) continue;
    if (fields.size() != 3) {
      throw InputError(fmt::format("{}: line {}: expected `year,month,value`", label, line_no));
    }
    if (fields[2].empty()) continue;
    const auto year = parse_number<int>(fields[0]);
    const auto month = parse_number<int>(fields[1]);
    const auto value = parse_number<double>(fields[2]);
    if (!year || !month || !value) {
      throw InputError(fmt::format("{}: line {}: malformed row '{}'", label, line_no, text));
    }
    observations.push_back({*year, *month, *value});
  }
  return MonthlySeries(std::move(label), std::move(observations));
}

MonthlySeries load_monthly_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_monthly_csv(in, path.stem().string());
}

std::pair<AnnualSeries, InfillReport> infill_by_regression(const AnnualSeries& target,
                                                           const AnnualSeries& reference,
                                                           std::span<const int> years_to_fill,
                                                           std::optional<YearRange> overlap) {
  if (target.kind() != reference.kind()) {
    throw std::invalid_argument("infill_by_regression: target and reference differ in kind");
  }
  for (const int year : years_to_fill) {
    if (target.contains(year)) {
      throw std::invalid_argument(fmt::format("infill_by_regression: {} already present in target", year));
    }
    if (!reference.contains(year)) {
      throw std::invalid_argument(fmt::format("infill_by_regression: {} unavailable in reference", year));
    }
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& obs : target.observations()) {
    if (overlap && !overlap->contains(obs.year)) continue;
    if (const auto ref = reference.at(obs.year)) {
      xs.push_back(*ref);
      ys.push_back(obs.value);
    }
  }
  if (xs.size() < kMinInfillOverlap) {
    throw std::invalid_argument(fmt::format(
        "infill_by_regression: {} overlapping years, need at least {}", xs.size(), kMinInfillOverlap));
  }

  const double n = static_cast<double>(xs.size());
  double x_mean = 0.0;
  double y_mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= n;
  y_mean /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - x_mean;
    const double dy = ys[i] - y_mean;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("infill_by_regression: reference constant over overlap");

  InfillReport report;
  report.regression_slope = sxy / sxx;
  report.regression_intercept = y_mean - report.regression_slope * x_mean;
  report.r_squared_of_fit = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  report.overlap_years = xs.size();

  std::vector<Observation> merged(target.observations().begin(), target.observations().end());
  for (const int year : years_to_fill) {
    const double filled = report.regression_intercept + report.regression_slope * *reference.at(year);
    merged.push_back({year, filled});
    report.filled_years.push_back(year);
  }
  std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.year < b.year; });
  std::sort(report.filled_years.begin(), report.filled_years.end());

  return {AnnualSeries(target.station_id(), target.kind(), std::move(merged)), std::move(report)};
}

AnnualSeries annual_max_of_monthly(const MonthlySeries& monthly) {
  if (monthly.size() == 0) throw std::invalid_argument("annual_max_of_monthly: empty input");
  std::vector<Observation> out;
  for (const auto& obs : monthly.observations()) {
    if (out.empty() || out.back().year != obs.year) {
      out.push_back({obs.year, obs.value});
    } else {
      out.back().value = std::max(out.back().value, obs.value);
    }
  }
  return AnnualSeries(monthly.label(), SeriesKind::covariate_index, std::move(out));
}

}  // namespace surgefreq
