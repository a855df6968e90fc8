#include "radwave/experiment/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace radwave::experiment {

Verdict verdict_le(std::string name, double measured, double bound, std::string provenance) {
  return {std::move(name), measured, bound, "<=", std::move(provenance), measured <= bound};
}

Verdict verdict_ge(std::string name, double measured, double bound, std::string provenance) {
  return {std::move(name), measured, bound, ">=", std::move(provenance), measured >= bound};
}

Verdict verdict_flag(std::string name, bool ok, double measured, std::string provenance) {
  return {std::move(name), measured, 0.0, "flag", std::move(provenance), ok};
}

Json to_json(const Verdict& v) {
  Json j;
  j["name"] = v.name;
  j["measured"] = v.measured;
  j["tolerance"] = v.tolerance;
  j["comparison"] = v.comparison;
  j["provenance"] = v.provenance;
  j["passed"] = v.passed;
  return j;
}

bool CommandReport::all_passed() const {
  for (const auto& v : verdicts) {
    if (!v.passed) return false;
  }
  return true;
}

Json assemble_report(const CommandReport& report, const ScenarioConfig& config, bool with_metadata) {
  Json doc;
  doc["command"] = report.command;
  if (with_metadata) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    doc["metadata"] = Json{{"generated_at", buf}};
  }
  doc["scenario"] = config.source;
  doc["results"] = report.results;
  Json verdicts = Json::array();
  for (const auto& v : report.verdicts) verdicts.push_back(to_json(v));
  doc["verdicts"] = verdicts;
  doc["all_passed"] = report.all_passed();
  return doc;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k) text_ += ',';
    text_ += header[k];
  }
  text_ += '\n';
}

void CsvTable::add_row(const std::vector<double>& row) {
  if (row.size() != columns_) throw std::logic_error("csv row width does not match the header");
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k) text_ += ',';
    text_ += format_number(row[k]);
  }
  text_ += '\n';
  ++rows_;
}

std::string CsvTable::str() const { return text_; }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move '" + tmp.string() + "' into place: " + ec.message());
  }
}

}  // namespace radwave::experiment
