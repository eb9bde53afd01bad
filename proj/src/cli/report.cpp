#include <cmath>
#include <string>

#include <fmt/format.h>

#include "surgefreq/cli.hpp"
#include "surgefreq/special.hpp"

namespace surgefreq::cli {

namespace {

std::string fixed(double value, int decimals) {
  if (std::isnan(value)) return "";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  const std::string s = fmt::format("{:.{}f}", value, decimals);
  // Avoid "-0.0" style output for values that round to zero.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) return s.substr(1);
  return s;
}

std::string flag(bool b) { return b ? "1" : "0"; }

std::string optional_fixed(const std::optional<double>& value, int decimals) {
  return value ? fixed(*value, decimals) : "";
}

}  // namespace

std::string windows_csv(const ScanResult& scan, const WindowSpec& spec) {
  std::vector<std::string> covariate_names;
  if (!scan.windows.empty()) {
    for (const auto& [name, _] : scan.windows.front().covariates) covariate_names.push_back(name);
  }

  std::string out = "start_year,end_year";
  for (const double p : spec.probabilities) out += ",q_" + probability_label(p);
  out += ",alpha,beta,runs_z,runs_pass,stationarity_t,stationarity_pass";
  for (const Family f : kAllFamilies) out += fmt::format(",ks_{}", to_string(f));
  for (const Family f : kAllFamilies) out += fmt::format(",aic_{}", to_string(f));
  out += ",selected_family";
  for (const auto& name : covariate_names) out += ",cov_" + name;
  out += '\n';

  for (const auto& w : scan.windows) {
    out += fmt::format("{},{}", w.start_year, w.years.back());
    for (const double p : spec.probabilities) out += "," + optional_fixed(w.quantile(p), 1);
    out += "," + fixed(w.location_alpha, 1) + "," + fixed(w.scale_beta, 1);
    out += "," + (w.runs ? fixed(w.runs->statistic, 3) + "," + flag(w.runs->passed) : std::string(","));
    out += "," + (w.stationarity ? fixed(w.stationarity->statistic, 3) + "," + flag(w.stationarity->passed)
                                 : std::string(","));
    for (const auto& o : w.families) out += "," + (o.usable() ? fixed(o.ks->statistic, 3) : std::string());
    for (const auto& o : w.families) out += "," + (o.usable() ? fixed(o.aic->value, 1) : std::string());
    out += fmt::format(",{}", to_string(w.selected_family));
    for (const auto& name : covariate_names) {
      const auto it = w.covariates.find(name);
      out += "," + (it == w.covariates.end() ? std::string() : optional_fixed(it->second, 3));
    }
    out += '\n';
  }
  return out;
}

std::string summary_csv(const ScanResult& scan, const WindowSpec& spec) {
  std::string out = "family,windows,usable_windows,max_ks,ks_critical,ks_failures,mean_aic,lowest_aic_count\n";
  const double critical = special::ks_critical_value(spec.length, spec.alpha);
  for (const auto& s : scan.summary) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(s.family), scan.windows.size(), s.usable_windows,
                       s.usable_windows ? fixed(s.max_ks, 3) : "", fixed(critical, 3), s.ks_failures,
                       fixed(s.mean_aic, 1), s.lowest_aic_count);
  }
  return out;
}

std::string trends_csv(const std::vector<TrendRow>& rows) {
  std::string out = "row,trend_mm_per_year,se_mm_per_year,t,p_value,critical_t,significant,marker\n";
  for (const auto& r : rows) {
    const auto& t = r.trend;
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.label, fixed(t.slope_mm_per_year, 2),
                       fixed(t.slope_se_mm_per_year, 2), fixed(t.t_statistic, 3), fixed(t.p_value, 4),
                       fixed(t.critical_value, 3), flag(t.significant), t.significant ? "" : "*");
  }
  return out;
}

std::string correlation_csv(const std::vector<CovariateCorrelation>& rows) {
  std::string out = "row,covariate,r,r_squared,p_value,significant,marker,n\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.target_label, r.covariate_label, fixed(r.r, 3),
                       fixed(r.r_squared, 2), fixed(r.p_value, 4), flag(r.significant),
                       r.significant ? "" : "*", r.n);
  }
  return out;
}

std::string plot_csv(std::span<const double> sample, const FittedDistribution& fit) {
  auto positions = plotting_positions(sample);
  std::string out = "exceedance_p,empirical_cm,theoretical_cm\n";
  for (const auto& pos : positions) {
    out += fmt::format("{:.6f},{},{}\n", pos.exceedance_p, fixed(pos.value, 1),
                       fixed(exceedance_quantile(fit, pos.exceedance_p), 1));
  }
  return out;
}

}  // namespace surgefreq::cli
