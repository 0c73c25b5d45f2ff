#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "morpho/contact.hpp"
#include "morpho/ground_effect.hpp"
#include "morpho/guidance.hpp"
#include "morpho/scenario.hpp"

namespace morpho {

/// One control-rate sample.
struct LogRow {
  double t = 0.0;
  StateVector x = StateVector::Zero();
  double phi = 0.0;
  double alpha = 0.0;
  AerialInput u = AerialInput::Zero();  // thrust commands after switching
  guidance::WheelCommand wheels;
  guidance::Mode mode = guidance::Mode::kFlight;
  double ge_ratio = 1.0;
};

struct SimEvent {
  double t = 0.0;
  std::string kind;    // mode, takeoff, touchdown, tipover
  std::string detail;
};

struct SimLog {
  std::string scenario;
  ControllerKind controller = ControllerKind::kNmpc;
  std::string preset;
  bool ground_effect = true;
  std::uint64_t seed = 0;
  double critical_angle_deg = 0.0;

  std::vector<LogRow> rows;
  std::vector<SimEvent> events;
  // Every wheel touchdown resolved by the contact model, in order.
  std::vector<TouchdownMetrics> touchdowns;
  ContactKind outcome = ContactKind::kAirborne;  // final contact state
  std::string tipover_reason;
  double drive_distance = 0.0;  // m driven on the surface after the last touchdown

  // Wall-clock controller statistics. Not written to output files.
  long controller_calls = 0;
  double mean_solve_seconds = 0.0;
  double max_solve_seconds = 0.0;
  int solver_failures = 0;

  std::vector<guidance::Mode> mode_sequence() const;
};

/// Closed-loop run. Deterministic given the scenario (including its seed).
/// `table` may be null when the scenario disables ground effect.
///
/// Throws SimDiverged or ScenarioInvalid.
SimLog run(const Scenario& scenario, const RobotParams& params,
           const GroundEffectTable* table);

struct Summary {
  TouchdownMetrics touchdown;
  bool touched_down = false;
  double max_mean_thrust_overall = 0.0;
  double max_lateral_excursion = 0.0;  // m, horizontal distance from the start
};

/// Touchdown metrics of the final landing: the first contact after the last
/// grounded stretch (later contacts within the same landing are hops). ū peak
/// is taken from the highest point of that airborne segment to touchdown.
///
/// Throws NoTouchdown when the log holds no touchdown.
TouchdownMetrics metrics(const SimLog& log);

/// Same metrics without throwing, plus whole-run statistics.
Summary summarize(const SimLog& log);

}  // namespace morpho
