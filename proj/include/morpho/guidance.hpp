#pragma once

#include <numbers>
#include <utility>

#include <Eigen/Core>

#include "morpho/dynamics.hpp"

namespace morpho::guidance {

inline constexpr double kMaxPilotSpeed = 1.0;  // m/s per axis

struct PilotCommand {
  Vec3 v_cmd = Vec3::Zero();  // m/s, world frame
  double throttle = 0.0;      // [0, 1]
  double yaw_rate_cmd = 0.0;  // rad/s

  /// Each velocity component clipped to +-1 m/s, throttle to [0, 1].
  PilotCommand limited() const;
};

/// p + v_cmd T_s with the command limited first.
Vec3 position_reference(const Vec3& p, const PilotCommand& cmd, double ts);

/// Full state reference: position p_ref, velocity v_cmd, attitude and body
/// rates zero.
StateVector state_reference(const Vec3& p_ref, const PilotCommand& cmd);

/// +v_max while descending below z_phi, -v_max on the ground with throttle
/// >= 0.5, zero otherwise.
double tilt_reference(double z, double throttle, bool grounded, double z_phi,
                      double v_max);

enum class Mode { kFlight = 0, kTransition = 1, kGrounded = 2 };

const char* mode_name(Mode m);

struct SupervisorConfig {
  double z_star = 0.45;             // m above the surface
  double phi_flight = 50.0 * std::numbers::pi / 180.0;
  double phi_transition = 70.0 * std::numbers::pi / 180.0;
  double ground_band = 0.01;        // m above the resting height
  double ground_speed = 0.05;       // m/s
  double release_delay = 0.05;      // s of continuous clearance before release
};

struct ModeState {
  Mode mode = Mode::kFlight;
  bool lambda = false;  // grounded flag
  double phi_limit = 50.0 * std::numbers::pi / 180.0;
  // Landing is armed once the vehicle has been above z_star since the last
  // grounding.
  bool landing_armed = true;
  double clear_time = 0.0;  // s spent clear of the ground while grounded
};

ModeState initial_mode(Mode m, const SupervisorConfig& cfg = {});

/// One supervisor tick of length dt.
///
/// `height` is the CoM height above the local surface, `height_rate` its rate
/// along the surface normal and `rest_height` the CoM height when resting on
/// the wheels. Grounded when height <= rest_height + 1 cm and |height_rate| <
/// 0.05 m/s; released only after 50 ms continuously outside that band.
ModeState mode_update(double height, double height_rate, double rest_height,
                      const ModeState& prev, double dt,
                      const SupervisorConfig& cfg = {});

/// Forces a grounded vehicle back into flight (thrusters re-enabled).
ModeState takeoff(const ModeState& prev, const SupervisorConfig& cfg = {});

struct WheelCommand {
  double left = 0.0;   // rad/s
  double right = 0.0;  // rad/s
};

struct RoutedCommands {
  AerialInput thrust = AerialInput::Zero();
  WheelCommand wheels;
};

/// flight: thrusters only; transition: both; grounded: wheels only.
RoutedCommands actuator_switch(const ModeState& mode, const AerialInput& u_a,
                               const WheelCommand& u_g);

/// left = (V + l w) / R, right = (V - l w) / R.
WheelCommand wheel_speeds(double v, double omega, double r, double l);
/// Inverse of wheel_speeds: (V, omega).
std::pair<double, double> unicycle_rates(const WheelCommand& w, double r, double l);

struct DrivePose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double wheel_radius = 0.12;
  double half_base = 0.15;
};

/// RK4 step of x' = V cos(theta), y' = V sin(theta), theta' = omega.
DrivePose unicycle_step(const DrivePose& pose, double v, double omega, double dt);

struct DriveGains {
  double k_v = 1.0;      // 1/s
  double k_theta = 2.0;  // 1/s
  double v_max = 1.0;    // m/s
  double omega_max = 2.0;  // rad/s
};

/// Saturated proportional tracking of a planar target. Targets behind the
/// vehicle are handled by turning in place.
std::pair<double, double> drive_track(const DrivePose& pose,
                                      const Eigen::Vector2d& target,
                                      const DriveGains& gains = {});

}  // namespace morpho::guidance
