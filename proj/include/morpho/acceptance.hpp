#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace morpho {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  bool soft = false;  // reported, never fails the suite
  std::string measured;
  std::string target;
};

struct AcceptanceConfig {
  std::filesystem::path scenario_dir;
  std::filesystem::path params_path;
  std::filesystem::path table_path;
  std::filesystem::path out_dir;  // run outputs are written here when non-empty
  std::uint64_t seed = 0;
  std::vector<int> only;  // criterion ids to run; empty runs all
};

/// Default paths under the shipped data directory.
AcceptanceConfig default_acceptance_config();

/// Runs every acceptance criterion. A failure inside one criterion (for
/// example an unreadable table) fails that criterion only.
std::vector<CriterionResult> run_acceptance(const AcceptanceConfig& cfg);

/// One line per criterion.
std::string format_report(const std::vector<CriterionResult>& results);

/// True when every non-soft criterion passed.
bool all_required_pass(const std::vector<CriterionResult>& results);

}  // namespace morpho
