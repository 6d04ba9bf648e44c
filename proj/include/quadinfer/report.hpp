#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "quadinfer/inference.hpp"
#include "quadinfer/simulation.hpp"

namespace quadinfer {

// Machine-readable run report.  Serialization is deterministic: keys are
// emitted sorted and doubles use shortest-round-trip formatting, so identical
// configurations produce byte-identical documents.  The meta timestamp is
// empty unless explicitly supplied (determinism by default).
struct Report {
  nlohmann::json meta;  // version, seed, effective config echo, timestamp
  std::vector<std::pair<std::string, InferenceResult>> results;
  nlohmann::json tables;  // coverage / power / calibration matrices
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const InferenceResult& r);
InferenceResult inference_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

// Deterministic pretty serialization (2-space indent, trailing newline).
std::string serialize_report(const Report& report);

// Summary-to-table helpers used by the CLI.
nlohmann::json summary_to_json(const SimSummary& summary);

// Plot-ready CSV emission.
// QQ data: rows "index,theoretical,observed" with observed = sorted p-values
// and theoretical = (i - 0.5)/m.
void write_qq_csv(const std::string& path, std::vector<double> p_values);
// Power data: rows "delta,rejection_rate,reps".
void write_power_csv(const std::string& path, const std::vector<PowerPoint>& points);

} // namespace quadinfer
