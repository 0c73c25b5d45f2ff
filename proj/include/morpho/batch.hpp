#pragma once

#include <optional>
#include <string>
#include <vector>

#include "morpho/sim.hpp"

namespace morpho {

struct BatchJob {
  Scenario scenario;
  RobotParams params;
};

struct BatchResult {
  std::optional<SimLog> log;
  std::string error;  // set when the run threw
};

/// Runs every job in order. Reference for run_batch_parallel.
std::vector<BatchResult> run_batch_serial(const std::vector<BatchJob>& jobs,
                                          const GroundEffectTable* table);

/// Same results as run_batch_serial, one job per OpenMP thread. Runs are
/// independent and carry their own seeds, so the output does not depend on
/// the thread count.
std::vector<BatchResult> run_batch_parallel(const std::vector<BatchJob>& jobs,
                                            const GroundEffectTable* table);

}  // namespace morpho
