#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace df {

// One bound check: pass holds exactly when observed <= bound_value, with
// any tolerance already folded into bound_value (and named in the formula).
struct MetricEntry {
  std::string name;
  double observed = 0;
  std::string bound_formula;
  double bound_value = 0;
  double slack = 0;  // bound_value - observed
  bool pass = false;
  // Informational entries (gating = false) are reported but do not drive
  // the process exit code.
  bool gating = true;
  nlohmann::json details;  // optional metric-specific extras

  static MetricEntry make(std::string name, double observed, std::string formula, double bound);
};

struct MetricReport {
  std::vector<MetricEntry> entries;

  bool all_pass() const;  // over gating entries only
};

nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

std::string report_to_string(const MetricReport& report);  // pretty JSON, trailing newline
void write_report_file(const std::string& path, const MetricReport& report);
MetricReport read_report_file(const std::string& path);

}  // namespace df
