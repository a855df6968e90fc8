#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "radwave/experiment/config.hpp"

namespace radwave::experiment {

struct Verdict {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string comparison;  // "<=", ">=", "flag"
  std::string provenance;  // "measured" or "closed-form"
  bool passed = false;
};

Verdict verdict_le(std::string name, double measured, double bound, std::string provenance = "measured");
Verdict verdict_ge(std::string name, double measured, double bound, std::string provenance = "measured");
Verdict verdict_flag(std::string name, bool ok, double measured = 0.0, std::string provenance = "measured");

Json to_json(const Verdict& v);

struct CommandReport {
  std::string command;
  Json results = Json::object();
  std::vector<Verdict> verdicts;

  bool all_passed() const;
};

// Report document: command, optional metadata, scenario echo, results, verdicts.
Json assemble_report(const CommandReport& report, const ScenarioConfig& config, bool with_metadata);

// %.17g, the round-trip representation used in every CSV cell.
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(const std::vector<double>& row);
  std::string str() const;
  std::size_t rows() const { return rows_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace radwave::experiment
