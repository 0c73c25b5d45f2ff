#include "morpho/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace morpho::guidance {

PilotCommand PilotCommand::limited() const {
  PilotCommand out = *this;
  out.v_cmd = v_cmd.cwiseMax(-kMaxPilotSpeed).cwiseMin(kMaxPilotSpeed);
  out.throttle = std::clamp(throttle, 0.0, 1.0);
  return out;
}

Vec3 position_reference(const Vec3& p, const PilotCommand& cmd, double ts) {
  return p + cmd.limited().v_cmd * ts;
}

StateVector state_reference(const Vec3& p_ref, const PilotCommand& cmd) {
  StateVector x = StateVector::Zero();
  x.segment<3>(idx::kPos) = p_ref;
  x.segment<3>(idx::kVel) = cmd.limited().v_cmd;
  return x;
}

double tilt_reference(double z, double throttle, bool grounded, double z_phi,
                      double v_max) {
  if (z < z_phi && !grounded) return v_max;
  if (throttle >= 0.5 && grounded) return -v_max;
  return 0.0;
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::kFlight: return "flight";
    case Mode::kTransition: return "transition";
    case Mode::kGrounded: return "grounded";
  }
  return "unknown";
}

namespace {

ModeState with_mode(ModeState s, Mode m, const SupervisorConfig& cfg) {
  s.mode = m;
  s.lambda = m == Mode::kGrounded;
  s.phi_limit = m == Mode::kFlight ? cfg.phi_flight : cfg.phi_transition;
  return s;
}

}  // namespace

ModeState initial_mode(Mode m, const SupervisorConfig& cfg) {
  ModeState s = with_mode({}, m, cfg);
  s.landing_armed = m != Mode::kGrounded;
  return s;
}

ModeState mode_update(double height, double height_rate, double rest_height,
                      const ModeState& prev, double dt,
                      const SupervisorConfig& cfg) {
  const bool in_band = height <= rest_height + cfg.ground_band &&
                       std::abs(height_rate) < cfg.ground_speed;
  ModeState next = prev;

  if (prev.mode == Mode::kGrounded) {
    next.clear_time = in_band ? 0.0 : prev.clear_time + dt;
    if (next.clear_time >= cfg.release_delay - 1e-12) {
      next = with_mode(next, Mode::kFlight, cfg);
      next.clear_time = 0.0;
      next.landing_armed = false;
    }
    return next;
  }

  if (height >= cfg.z_star) next.landing_armed = true;
  if (in_band && next.landing_armed) {
    next = with_mode(next, Mode::kGrounded, cfg);
    next.clear_time = 0.0;
    return next;
  }
  if (next.landing_armed && height < cfg.z_star) {
    return with_mode(next, Mode::kTransition, cfg);
  }
  if (prev.mode == Mode::kTransition) {
    return with_mode(next, Mode::kFlight, cfg);
  }
  return next;
}

ModeState takeoff(const ModeState& prev, const SupervisorConfig& cfg) {
  ModeState s = with_mode(prev, Mode::kFlight, cfg);
  s.landing_armed = false;
  s.clear_time = 0.0;
  return s;
}

RoutedCommands actuator_switch(const ModeState& mode, const AerialInput& u_a,
                               const WheelCommand& u_g) {
  RoutedCommands out;
  switch (mode.mode) {
    case Mode::kFlight:
      out.thrust = u_a;
      break;
    case Mode::kTransition:
      out.thrust = u_a;
      out.wheels = u_g;
      break;
    case Mode::kGrounded:
      out.wheels = u_g;
      break;
  }
  return out;
}

WheelCommand wheel_speeds(double v, double omega, double r, double l) {
  return {(v + l * omega) / r, (v - l * omega) / r};
}

std::pair<double, double> unicycle_rates(const WheelCommand& w, double r, double l) {
  return {0.5 * r * (w.left + w.right), 0.5 * r * (w.left - w.right) / l};
}

DrivePose unicycle_step(const DrivePose& pose, double v, double omega, double dt) {
  const auto f = [&](double heading) {
    return Eigen::Vector3d(v * std::cos(heading), v * std::sin(heading), omega);
  };
  const Eigen::Vector3d k1 = f(pose.heading);
  const Eigen::Vector3d k2 = f(pose.heading + 0.5 * dt * k1.z());
  const Eigen::Vector3d k3 = f(pose.heading + 0.5 * dt * k2.z());
  const Eigen::Vector3d k4 = f(pose.heading + dt * k3.z());
  const Eigen::Vector3d d = dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  DrivePose out = pose;
  out.x += d.x();
  out.y += d.y();
  out.heading += d.z();
  return out;
}

std::pair<double, double> drive_track(const DrivePose& pose,
                                      const Eigen::Vector2d& target,
                                      const DriveGains& gains) {
  const Eigen::Vector2d e = target - Eigen::Vector2d(pose.x, pose.y);
  if (e.norm() < 1e-9) return {0.0, 0.0};
  const double bearing = std::atan2(e.y(), e.x());
  const double heading_error = std::remainder(bearing - pose.heading,
                                              2.0 * std::numbers::pi);
  const double omega = std::clamp(gains.k_theta * heading_error,
                                  -gains.omega_max, gains.omega_max);
  if (std::abs(heading_error) > std::numbers::pi / 2) return {0.0, omega};
  const double along = e.x() * std::cos(pose.heading) + e.y() * std::sin(pose.heading);
  const double v = std::clamp(gains.k_v * along, -gains.v_max, gains.v_max);
  return {v, omega};
}

}  // namespace morpho::guidance
