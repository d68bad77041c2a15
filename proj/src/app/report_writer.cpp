#include "wassoc/app/report_writer.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "wassoc/error.hpp"

namespace wassoc::app {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_float()) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v.get<double>());
    return std::string(buf, ptr);
  }
  if (v.is_number()) return v.dump();
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

void flatten(const nlohmann::json& node, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  if (node.is_object()) {
    for (const auto& [key, child] : node.items()) {
      flatten(child, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else {
    out.emplace_back(prefix, scalar_text(node));
  }
}

}  // namespace

void write_json(std::ostream& out, const Report& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"scope", row.scope}, {"label", row.label}, {"metrics", row.metrics}});
  }
  nlohmann::json doc = {{"meta", report.meta}, {"rows", rows}};
  out << doc.dump(2) << '\n';
}

void write_csv(std::ostream& out, const Report& report) {
  out << "scope,label,metric,value\n";
  std::vector<std::pair<std::string, std::string>> leaves;
  flatten(report.meta, "", leaves);
  for (const auto& [metric, value] : leaves) {
    out << "meta,," << csv_field(metric) << ',' << csv_field(value) << '\n';
  }
  for (const auto& row : report.rows) {
    leaves.clear();
    flatten(row.metrics, "", leaves);
    for (const auto& [metric, value] : leaves) {
      out << csv_field(row.scope) << ',' << csv_field(row.label) << ',' << csv_field(metric) << ','
          << csv_field(value) << '\n';
    }
  }
}

std::filesystem::path write_report(const std::filesystem::path& dir, const std::string& stem,
                                   const Report& report, ReportFormat format) {
  std::filesystem::path path = dir / (stem + (format == ReportFormat::json ? ".json" : ".csv"));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  if (format == ReportFormat::json) {
    write_json(out, report);
  } else {
    write_csv(out, report);
  }
  if (!out) throw Error("failed writing " + path.string());
  return path;
}

}  // namespace wassoc::app
