#pragma once

// Experiment reports: flat "section.key=value" text plus one CSV file per
// plot table, written next to the report.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dtfa/error.hpp"

namespace dtfa::bench {

inline std::string format_value(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::initializer_list<double> row) { rows.emplace_back(row); }
  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

struct ExperimentReport {
  std::string config_echo;
  std::string version;
  std::vector<std::pair<std::string, std::string>> metrics;
  std::vector<std::pair<std::string, std::string>> timings;
  std::vector<Table> tables;

  void metric(const std::string& key, double v) { metrics.emplace_back(key, format_value(v)); }
  void metric(const std::string& key, std::size_t v) { metrics.emplace_back(key, std::to_string(v)); }
  void metric(const std::string& key, bool v) { metrics.emplace_back(key, v ? "true" : "false"); }
  void metric(const std::string& key, const std::string& v) { metrics.emplace_back(key, v); }
  void metric(const std::string& key, const char* v) { metrics.emplace_back(key, v); }

  const std::string* find_metric(const std::string& key) const {
    for (const auto& [k, v] : metrics)
      if (k == key) return &v;
    return nullptr;
  }
  const Table* find_table(const std::string& name) const {
    for (const auto& t : tables)
      if (t.name == name) return &t;
    return nullptr;
  }
};

inline std::string table_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_value(row[c]);
    out += "\n";
  }
  return out;
}

/// Companion table path: "<dir>/<stem>_<name>.csv" for report "<dir>/<stem>.txt".
inline std::filesystem::path table_path(const std::filesystem::path& report_path, const std::string& name) {
  auto p = report_path;
  p.replace_filename(report_path.stem().string() + "_" + name + ".csv");
  return p;
}

/// Config echo as "config.key=value" lines, then version, metrics, timings and
/// table file names. Only the timing lines vary between identical runs.
inline std::string render_report(const ExperimentReport& report, const std::filesystem::path& report_path = {}) {
  std::string out;
  std::istringstream echo(report.config_echo);
  for (std::string line; std::getline(echo, line);)
    if (!line.empty()) out += "config." + line + "\n";
  if (!report.version.empty()) out += "version=" + report.version + "\n";
  for (const auto& [k, v] : report.metrics) out += "metric." + k + "=" + v + "\n";
  for (const auto& [k, v] : report.timings) out += "timing." + k + "=" + v + "\n";
  for (const auto& t : report.tables)
    out += "table." + t.name + "=" + table_path(report_path, t.name).filename().string() + "\n";
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
  out.close();
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
}

inline void write_report(const ExperimentReport& report, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorKind::io, "cannot create '" + path.parent_path().string() + "': " + ec.message());
  write_text_file(path, render_report(report, path));
  for (const auto& t : report.tables) write_text_file(table_path(path, t.name), table_csv(t));
}

}  // namespace dtfa::bench
