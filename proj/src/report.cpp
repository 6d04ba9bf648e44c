#include "quadinfer/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "quadinfer/errors.hpp"
#include "quadinfer/estimators.hpp"

namespace quadinfer {

namespace {

// Shortest decimal string that round-trips the double (so "0", "0.05", "6").
std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::ofstream open_sink(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot open output file '" + path + "'");
  }
  return out;
}

} // namespace

nlohmann::json to_json(const InferenceResult& r) {
  nlohmann::json j;
  j["estimate"] = r.estimate;
  j["std_error"] = r.std_error;
  j["z"] = r.z;
  j["p_value"] = r.p_value;
  j["p_value_one_sided"] = r.p_value_one_sided;
  j["ci_low"] = r.ci_low;
  j["ci_high"] = r.ci_high;
  j["ci_low_raw"] = r.ci_low_raw;
  j["ci_high_raw"] = r.ci_high_raw;
  j["alpha"] = r.alpha;
  j["flags"] = r.flags;
  j["flag_names"] = flag_names(r.flags);
  return j;
}

InferenceResult inference_from_json(const nlohmann::json& j) {
  InferenceResult r;
  r.estimate = j.at("estimate").get<double>();
  r.std_error = j.at("std_error").get<double>();
  r.z = j.at("z").get<double>();
  r.p_value = j.at("p_value").get<double>();
  r.p_value_one_sided = j.at("p_value_one_sided").get<double>();
  r.ci_low = j.at("ci_low").get<double>();
  r.ci_high = j.at("ci_high").get<double>();
  r.ci_low_raw = j.at("ci_low_raw").get<double>();
  r.ci_high_raw = j.at("ci_high_raw").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.flags = j.at("flags").get<unsigned>();
  return r;
}

nlohmann::json to_json(const Report& report) {
  nlohmann::json j;
  j["meta"] = report.meta.is_null() ? nlohmann::json::object() : report.meta;
  nlohmann::json results = nlohmann::json::array();
  for (const auto& [name, r] : report.results) {
    nlohmann::json entry;
    entry["test"] = name;
    entry["result"] = to_json(r);
    results.push_back(std::move(entry));
  }
  j["results"] = std::move(results);
  j["tables"] = report.tables.is_null() ? nlohmann::json::object() : report.tables;
  j["warnings"] = report.warnings;
  return j;
}

Report report_from_json(const nlohmann::json& j) {
  Report report;
  report.meta = j.at("meta");
  for (const auto& entry : j.at("results")) {
    report.results.emplace_back(entry.at("test").get<std::string>(),
                                inference_from_json(entry.at("result")));
  }
  report.tables = j.at("tables");
  report.warnings = j.at("warnings").get<std::vector<std::string>>();
  return report;
}

std::string serialize_report(const Report& report) {
  return to_json(report).dump(2) + "\n";
}

nlohmann::json summary_to_json(const SimSummary& s) {
  nlohmann::json j;
  j["reps_completed"] = s.reps_completed;
  j["reps_failed"] = s.reps_failed;
  j["reps_flagged"] = s.reps_flagged;
  j["ks"] = {{"d", s.ks.d}, {"p_value", s.ks.p_value}};
  j["coverage"] = s.coverage;
  j["coverage_sigma2"] = s.coverage_sigma2;
  j["coverage_rho"] = s.coverage_rho;
  j["coverage_eta"] = s.coverage_eta;
  j["mean_ci_length"] = s.mean_ci_length;
  j["rejection_rate"] = s.rejection_rate;
  j["mean_estimate"] = s.mean_estimate;
  j["var_estimate"] = s.var_estimate;
  j["median_variance"] = s.median_variance;
  nlohmann::json truth;
  truth["norm2_beta0"] = s.truth.norm2_beta0;
  truth["eta0"] = s.truth.eta0;
  truth["rho0"] = s.truth.rho0;
  truth["sigma2_eps"] = s.truth.sigma2_eps;
  truth["theta0"] = s.truth.theta0;
  j["truth"] = std::move(truth);
  return j;
}

void write_qq_csv(const std::string& path, std::vector<double> p_values) {
  std::ofstream out = open_sink(path);
  out << "index,theoretical,observed\n";
  std::sort(p_values.begin(), p_values.end());
  const double m = static_cast<double>(p_values.size());
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    const double theoretical = (static_cast<double>(i) + 0.5) / m;
    out << i << ',' << format_double(theoretical) << ','
        << format_double(p_values[i]) << '\n';
  }
}

void write_power_csv(const std::string& path,
                     const std::vector<PowerPoint>& points) {
  std::ofstream out = open_sink(path);
  out << "delta,rejection_rate,reps\n";
  for (const PowerPoint& pt : points) {
    out << format_double(pt.delta) << ',' << format_double(pt.rejection_rate)
        << ',' << pt.reps << '\n';
  }
}

} // namespace quadinfer
