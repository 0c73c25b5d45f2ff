#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "morpho/contact.hpp"
#include "morpho/guidance.hpp"
#include "morpho/nmpc.hpp"

namespace morpho {

enum class ControllerKind { kNmpc, kPid };

ControllerKind controller_from_name(const std::string& name);
const char* controller_name(ControllerKind k);

/// How the position reference advances each control period.
///   relative:   p_ref = p + v_cmd T_s (measured position)
///   integrated: p_ref = p_ref_prev + v_cmd T_s
enum class ReferenceMode { kRelative, kIntegrated };

struct PilotEntry {
  double t = 0.0;  // s, command holds from t until the next entry
  guidance::PilotCommand cmd;
};

/// Body-frame force/torque held constant over [t, t + duration).
struct Disturbance {
  double t = 0.0;
  double duration = 0.01;
  Vec3 force = Vec3::Zero();   // N
  Vec3 torque = Vec3::Zero();  // N m
};

struct NoiseConfig {
  bool enabled = false;
  double position_sd = 0.0;  // m
  double attitude_sd = 0.0;  // rad
  double velocity_sd = 0.0;  // m/s
  double rate_sd = 0.0;      // rad/s
};

struct Scenario {
  std::string name = "scenario";
  double duration = 10.0;      // s
  double physics_dt = 0.001;   // s, upper bound on the physics step
  double control_rate = 150.0; // Hz

  StateVector initial = StateVector::Zero();  // CoM state
  double initial_phi = 0.0;                   // rad
  bool start_grounded = false;
  Vec3 reference_offset = Vec3::Zero();  // m, initial p_ref minus position

  Surface surface;
  bool ground_effect = true;
  bool ge_variability = true;  // sample the per-cell sigma
  std::uint64_t seed = 0;
  ControllerKind controller = ControllerKind::kNmpc;
  std::string preset = "fig5";

  guidance::SupervisorConfig supervisor;
  double z_phi = 1.5;    // m, tilt-out altitude
  double v_max = 0.35;   // rad/s, tilt rate
  ReferenceMode reference = ReferenceMode::kIntegrated;
  bool takeoff_retract = true;  // -v_max while climbing after a takeoff
  // Run ends this long after a touchdown (negative: run to `duration`).
  double stop_after_grounded = -1.0;

  OcpConfig ocp;
  std::vector<PilotEntry> pilot;
  std::vector<Disturbance> disturbances;
  NoiseConfig noise;

  /// Control period split into whole physics steps no longer than physics_dt.
  int physics_substeps() const;
  double physics_step() const;
  /// Latest pilot entry with t_i <= t (zero command before the first).
  guidance::PilotCommand pilot_at(double t) const;
  /// Sum of the disturbances active at t.
  Wrench disturbance_at(double t) const;

  /// Throws ScenarioInvalid.
  void validate() const;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario load_scenario_string(const std::string& text);

RobotParams load_robot_params(const std::filesystem::path& path);
RobotParams load_robot_params_string(const std::string& text);

/// Sets a scenario or robot key given by dotted name (used by sweeps).
/// Throws UnknownParameter for unrecognized names.
void apply_parameter(const std::string& name, double value, Scenario& scenario,
                     RobotParams& params);

/// Names accepted by apply_parameter.
std::vector<std::string> sweepable_parameters();

/// Directory holding the shipped data files.
std::filesystem::path data_dir();

}  // namespace morpho
