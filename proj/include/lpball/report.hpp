#pragma once

// Structured experiment results and their CSV / JSON encodings.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpball/errors.hpp"

namespace lpball {

/// One named quantity of a report. Rows without a reference are plain
/// estimates; rows with `pass` set are criteria.
struct ReportRow {
  std::string name;
  std::optional<double> estimate;  // nullopt: undefined (e.g. no tail hits)
  std::optional<double> stderr_estimate;
  std::optional<double> reference;
  std::string reference_provenance;
  std::optional<double> tolerance;
  std::optional<bool> pass;
  std::string note;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<ReportRow> rows;
  std::optional<double> wall_time;

  /// True when no criterion row failed.
  [[nodiscard]] bool passed() const {
    for (const auto& r : rows)
      if (r.pass.has_value() && !*r.pass) return false;
    return true;
  }

  [[nodiscard]] const ReportRow* find(const std::string& name) const {
    for (const auto& r : rows)
      if (r.name == name) return &r;
    return nullptr;
  }

  ReportRow& add(ReportRow row) {
    rows.push_back(std::move(row));
    return rows.back();
  }

  friend bool operator==(const ExperimentReport& a, const ExperimentReport& b) {
    return a.experiment == b.experiment && a.config == b.config && a.rows == b.rows && a.wall_time == b.wall_time;
  }
};

enum class ReportFormat { csv, json };

namespace detail {

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_optional(const std::optional<double>& x) { return x ? format_number(*x) : std::string(); }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Non-finite values are stored as strings so the document stays valid JSON.
inline nlohmann::ordered_json number_to_json(const std::optional<double>& x) {
  if (!x) return nullptr;
  if (!std::isfinite(*x)) return format_number(*x);
  return *x;
}

inline std::optional<double> number_from_json(const nlohmann::ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ConfigError("number", "unrecognized numeric token '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace detail

inline constexpr const char* kCsvHeader = "experiment,name,estimate,stderr,reference,reference_provenance,tolerance,pass";

inline void write_csv(const ExperimentReport& report, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    os << detail::csv_field(report.experiment) << ',' << detail::csv_field(r.name) << ','
       << detail::format_optional(r.estimate) << ',' << detail::format_optional(r.stderr_estimate) << ','
       << detail::format_optional(r.reference) << ',' << detail::csv_field(r.reference_provenance) << ','
       << detail::format_optional(r.tolerance) << ',' << (r.pass ? (*r.pass ? "true" : "false") : "") << '\n';
  }
}

inline nlohmann::ordered_json to_json(const ExperimentReport& report, bool include_timing = true) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["name"] = r.name;
    row["estimate"] = detail::number_to_json(r.estimate);
    row["stderr"] = detail::number_to_json(r.stderr_estimate);
    row["reference"] = detail::number_to_json(r.reference);
    row["reference_provenance"] = r.reference_provenance;
    row["tolerance"] = detail::number_to_json(r.tolerance);
    row["pass"] = r.pass ? nlohmann::ordered_json(*r.pass) : nlohmann::ordered_json(nullptr);
    row["note"] = r.note;
    rows.push_back(std::move(row));
  }
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["config"] = report.config;
  j["rows"] = std::move(rows);
  j["passed"] = report.passed();
  if (include_timing && report.wall_time) j["wall_time"] = *report.wall_time;
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::ordered_json& j) {
  ExperimentReport report;
  report.experiment = j.at("experiment").get<std::string>();
  report.config = j.at("config");
  for (const auto& row : j.at("rows")) {
    ReportRow r;
    r.name = row.at("name").get<std::string>();
    r.estimate = detail::number_from_json(row.at("estimate"));
    r.stderr_estimate = detail::number_from_json(row.at("stderr"));
    r.reference = detail::number_from_json(row.at("reference"));
    r.reference_provenance = row.at("reference_provenance").get<std::string>();
    r.tolerance = detail::number_from_json(row.at("tolerance"));
    if (!row.at("pass").is_null()) r.pass = row.at("pass").get<bool>();
    r.note = row.value("note", "");
    report.rows.push_back(std::move(r));
  }
  if (j.contains("wall_time")) report.wall_time = j.at("wall_time").get<double>();
  return report;
}

inline void write_report(const ExperimentReport& report, ReportFormat format, std::ostream& os,
                         bool include_timing = false) {
  if (format == ReportFormat::csv) {
    write_csv(report, os);
  } else {
    os << to_json(report, include_timing).dump(2) << '\n';
  }
}

/// Writes the report to `path`; throws ConfigError("output", ...) when the
/// file cannot be opened.
inline void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path,
                        bool include_timing = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output", "cannot open '" + path + "' for writing");
  write_report(report, format, out, include_timing);
  if (!out) throw ConfigError("output", "failed writing '" + path + "'");
}

}  // namespace lpball
