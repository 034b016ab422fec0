#include "df/report.hpp"

#include <fstream>

#include "df/common.hpp"

namespace df {

using nlohmann::json;

MetricEntry MetricEntry::make(std::string name, double observed, std::string formula,
                              double bound) {
  MetricEntry e;
  e.name = std::move(name);
  e.observed = observed;
  e.bound_formula = std::move(formula);
  e.bound_value = bound;
  e.slack = bound - observed;
  e.pass = observed <= bound;
  return e;
}

bool MetricReport::all_pass() const {
  for (const MetricEntry& e : entries)
    if (e.gating && !e.pass) return false;
  return true;
}

json report_to_json(const MetricReport& report) {
  json entries = json::array();
  for (const MetricEntry& e : report.entries) {
    json j;
    j["name"] = e.name;
    j["observed"] = e.observed;
    j["bound_formula"] = e.bound_formula;
    j["bound_value"] = e.bound_value;
    j["slack"] = e.slack;
    j["pass"] = e.pass;
    j["gating"] = e.gating;
    if (!e.details.is_null()) j["details"] = e.details;
    entries.push_back(std::move(j));
  }
  json out;
  out["entries"] = std::move(entries);
  out["pass"] = report.all_pass();
  return out;
}

MetricReport report_from_json(const json& j) {
  MetricReport report;
  try {
    for (const json& je : j.at("entries")) {
      MetricEntry e;
      e.name = je.at("name").get<std::string>();
      e.observed = je.at("observed").get<double>();
      e.bound_formula = je.at("bound_formula").get<std::string>();
      e.bound_value = je.at("bound_value").get<double>();
      e.slack = je.at("slack").get<double>();
      e.pass = je.at("pass").get<bool>();
      e.gating = je.value("gating", true);
      if (je.contains("details")) e.details = je.at("details");
      report.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw config_error(std::string("bad report JSON: ") + e.what());
  }
  return report;
}

std::string report_to_string(const MetricReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

void write_report_file(const std::string& path, const MetricReport& report) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open '" + path + "' for writing");
  out << report_to_string(report);
  if (!out) throw config_error("report write failed: '" + path + "'");
}

MetricReport read_report_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open report file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config_error("bad report JSON in '" + path + "': " + e.what());
  }
  return report_from_json(j);
}

}  // namespace df
