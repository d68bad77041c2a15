#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wassoc/app/commands.hpp"

namespace wassoc::app {

// One slice of a tidy report. `metrics` is a (possibly nested) object of
// numbers, booleans and strings.
struct ReportRow {
  std::string scope;  // "global", an attribute name, or a table name
  std::string label;
  nlohmann::json metrics;
};

struct Report {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<ReportRow> rows;
};

// JSON: {"meta": {...}, "rows": [{"scope", "label", "metrics"}]}.
void write_json(std::ostream& out, const Report& report);

// Tidy CSV with header "scope,label,metric,value": meta entries first (scope
// "meta"), then one line per leaf metric, nested keys joined with '.'.
// Booleans are written as 1/0; numbers use the shortest round-trip form.
void write_csv(std::ostream& out, const Report& report);

// Writes <dir>/<stem>.json or <dir>/<stem>.csv and returns the path.
std::filesystem::path write_report(const std::filesystem::path& dir, const std::string& stem,
                                   const Report& report, ReportFormat format);

}  // namespace wassoc::app
