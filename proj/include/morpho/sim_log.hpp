#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "morpho/sim.hpp"

namespace morpho {

/// Column names of the log CSV, in order.
const std::vector<std::string>& csv_columns();

std::string to_csv(const SimLog& log);
/// Summary record (YAML): run identity, touchdown metrics, events.
std::string to_summary(const SimLog& log);

/// Numeric columns of a log CSV keyed by name; the mode column is mapped to
/// 0 (flight), 1 (transition), 2 (grounded).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // one vector per column

  const std::vector<double>& column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// log.csv and summary.yaml in `dir`.
void write_run_outputs(const SimLog& log, const std::filesystem::path& dir);

}  // namespace morpho
