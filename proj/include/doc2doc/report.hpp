#pragma once

// Consolidated per-system summary: d-BLEU, TC, CP, PT and a TCP that is
// always recomputed from the three span metrics.

#include <cstddef>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "doc2doc/error.hpp"
#include "doc2doc/formats.hpp"
#include "doc2doc/metrics.hpp"

namespace doc2doc {

/// One line of a metric record file.
struct MetricRecord {
  std::string system;
  MetricReport report;
};

inline nlohmann::json to_json(const MetricRecord& r) {
  nlohmann::json j = r.report.to_json();
  j["system"] = r.system;
  return j;
}

inline std::string format_metric_records(const std::vector<MetricRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += dump_record(to_json(r));
    out += '\n';
  }
  return out;
}

inline std::vector<MetricRecord> read_metric_records(const std::filesystem::path& path) {
  std::vector<MetricRecord> out;
  for_each_record(path, [&](const nlohmann::json& rec, std::size_t) {
    MetricRecord r;
    r.system = rec.at("system").get<std::string>();
    r.report.name = rec.at("name").get<std::string>();
    r.report.value = rec.at("value").get<double>();
    if (rec.contains("numerator")) r.report.numerator = rec.at("numerator").get<std::size_t>();
    if (rec.contains("denominator"))
      r.report.denominator = rec.at("denominator").get<std::size_t>();
    if (r.system.empty()) throw Error("metric record with empty system name");
    out.push_back(std::move(r));
  });
  return out;
}

struct SystemRow {
  std::string system;
  std::optional<double> d_bleu, tc, cp, pt;

  std::optional<double> tcp_value() const {
    if (!tc || !cp || !pt) return std::nullopt;
    return tcp(*tc, *cp, *pt);
  }
};

/// Rows in order of first appearance. Incoming TCP values are ignored.
inline std::vector<SystemRow> collect_rows(const std::vector<MetricRecord>& records) {
  std::vector<SystemRow> rows;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, inserted] = index.try_emplace(r.system, rows.size());
    if (inserted) rows.push_back({r.system, {}, {}, {}, {}});
    SystemRow& row = rows[it->second];
    const std::string& n = r.report.name;
    if (n == "d-BLEU") row.d_bleu = r.report.value;
    else if (n == "TC") row.tc = r.report.value;
    else if (n == "CP") row.cp = r.report.value;
    else if (n == "PT") row.pt = r.report.value;
  }
  return rows;
}

inline std::string format_report_table(const std::vector<SystemRow>& rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.system.size());
  auto cell = [](std::optional<double> v, int digits) {
    return v ? format_fixed(*v, digits) : std::string("-");
  };
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "system" << std::right
     << std::setw(9) << "d-BLEU" << std::setw(7) << "TC" << std::setw(7) << "CP" << std::setw(7)
     << "PT" << std::setw(7) << "TCP" << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(width)) << r.system << std::right
       << std::setw(9) << cell(r.d_bleu, 2) << std::setw(7) << cell(r.tc, 1) << std::setw(7)
       << cell(r.cp, 1) << std::setw(7) << cell(r.pt, 1) << std::setw(7) << cell(r.tcp_value(), 1)
       << '\n';
  }
  return os.str();
}

}  // namespace doc2doc
