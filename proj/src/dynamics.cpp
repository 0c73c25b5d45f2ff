#include "morpho/dynamics.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "morpho/errors.hpp"

namespace morpho {

namespace {
constexpr double kSingularPitch = 89.0 * std::numbers::pi / 180.0;
constexpr double kMaxStep = 0.01 + 1e-12;
}

Mat3 rotation_from_euler(double yaw, double pitch, double roll) {
  const double cz = std::cos(yaw), sz = std::sin(yaw);
  const double cy = std::cos(pitch), sy = std::sin(pitch);
  const double cx = std::cos(roll), sx = std::sin(roll);
  Mat3 r;
  r << cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,
       sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,
       -sy,     cy * sx,                cy * cx;
  return r;
}

Vec3 euler_from_rotation(const Mat3& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  return {yaw, pitch, roll};
}

Wrench thrust_wrench(const AerialInput& u, const TiltedConfig& cfg,
                     const RobotParams& p, double ge_ratio) {
  Wrench w;
  for (int i = 0; i < 4; ++i) {
    const double thrust = ge_ratio * p.k_T * u[i];
    const Vec3 f = thrust * cfg.rotor_axis[i];
    w.force += f;
    w.torque += cfg.rotor_pos[i].cross(f) + p.spin_signs[i] * p.k_M * f;
  }
  return w;
}

Wrench thrust_wrench(const AerialInput& u, double phi, const RobotParams& p,
                     double ge_ratio) {
  return thrust_wrench(u, configure(p, phi), p, ge_ratio);
}

Mat3 composite_inertia(double phi, const RobotParams& p) {
  return configure(p, phi).inertia;
}

StateVector eom(const StateVector& x, const AerialInput& u,
                const TiltedConfig& cfg, const RobotParams& p,
                double ge_ratio, const Wrench& external) {
  const double yaw = x[idx::kYaw];
  const double pitch = x[idx::kPitch];
  const double roll = x[idx::kRoll];
  if (!(std::abs(pitch) < kSingularPitch)) {
    throw EulerSingularity(fmt::format("pitch = {} rad", pitch));
  }
  const Vec3 omega = x.segment<3>(idx::kOmega);
  Wrench w = thrust_wrench(u, cfg, p, ge_ratio);
  w.force += external.force;
  w.torque += external.torque;

  StateVector dx;
  dx.segment<3>(idx::kPos) = x.segment<3>(idx::kVel);

  // Body rates to zyx Euler rates.
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), tp = std::tan(pitch);
  const double q_r = sr * omega.y() + cr * omega.z();
  dx[idx::kYaw] = q_r / cp;
  dx[idx::kPitch] = cr * omega.y() - sr * omega.z();
  dx[idx::kRoll] = omega.x() + tp * q_r;

  const Mat3 r = rotation_from_euler(yaw, pitch, roll);
  dx.segment<3>(idx::kVel) = r * w.force / cfg.mass - Vec3(0.0, 0.0, p.g);
  dx.segment<3>(idx::kOmega) =
      cfg.inertia_inv * (w.torque - omega.cross(cfg.inertia * omega));
  return dx;
}

StateVector eom(const StateVector& x, const AerialInput& u, double phi,
                const RobotParams& p, double ge_ratio) {
  return eom(x, u, configure(p, phi), p, ge_ratio);
}

StateVector rk4_step(const StateVector& x, const AerialInput& u,
                     const TiltedConfig& cfg, double dt, const RobotParams& p,
                     double ge_ratio, const Wrench& external) {
  if (!(dt > 0.0 && dt <= kMaxStep)) {
    throw InvalidParams(fmt::format("RK4 step {} s outside (0, 0.01]", dt));
  }
  const StateVector k1 = eom(x, u, cfg, p, ge_ratio, external);
  const StateVector k2 = eom(x + 0.5 * dt * k1, u, cfg, p, ge_ratio, external);
  const StateVector k3 = eom(x + 0.5 * dt * k2, u, cfg, p, ge_ratio, external);
  const StateVector k4 = eom(x + dt * k3, u, cfg, p, ge_ratio, external);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

StateVector rk4_step(const StateVector& x, const AerialInput& u, double phi,
                     double dt, const RobotParams& p, double ge_ratio) {
  return rk4_step(x, u, configure(p, phi), dt, p, ge_ratio);
}

StateVector integrate(const StateVector& x, const AerialInput& u,
                      const TiltedConfig& cfg, double duration,
                      const RobotParams& p, double ge_ratio, double max_step) {
  const int steps = std::max(1, static_cast<int>(std::ceil(duration / max_step - 1e-9)));
  const double h = duration / steps;
  StateVector out = x;
  for (int i = 0; i < steps; ++i) out = rk4_step(out, u, cfg, h, p, ge_ratio);
  return out;
}

double critical_angle(const RobotParams& p) {
  const double tw = p.thrust_to_weight();
  if (tw < 1.0 - 1e-12) {
    throw NoCriticalAngle(fmt::format("thrust-to-weight {} < 1", tw));
  }
  return std::acos(std::min(1.0, 1.0 / tw));
}

double max_flight_tilt(const RobotParams& p, double margin) {
  const double tw = p.thrust_to_weight();
  if (margin > tw + 1e-12) {
    throw InfeasibleMargin(
        fmt::format("margin {} exceeds thrust-to-weight {}", margin, tw));
  }
  if (margin < 1.0) {
    throw InfeasibleMargin(fmt::format("margin {} below 1", margin));
  }
  return std::acos(std::min(1.0, margin / tw));
}

double hover_command(const RobotParams& p, double phi, double ge_ratio) {
  const double u = p.mass() * p.g / (4.0 * p.k_T * ge_ratio * std::cos(phi));
  return std::clamp(u, 0.0, 1.0);
}

Linearization linearize(const StateVector& x, const AerialInput& u, double phi,
                        const RobotParams& p, double ge_ratio) {
  constexpr double kStep = 1e-6;
  const TiltedConfig cfg = configure(p, phi);
  Linearization lin;
  for (int j = 0; j < 12; ++j) {
    StateVector xp = x, xm = x;
    xp[j] += kStep;
    xm[j] -= kStep;
    lin.a.col(j) =
        (eom(xp, u, cfg, p, ge_ratio) - eom(xm, u, cfg, p, ge_ratio)) / (2 * kStep);
  }
  for (int j = 0; j < 4; ++j) {
    AerialInput up = u, um = u;
    up[j] += kStep;
    um[j] -= kStep;
    lin.b.col(j) =
        (eom(x, up, cfg, p, ge_ratio) - eom(x, um, cfg, p, ge_ratio)) / (2 * kStep);
  }
  return lin;
}

double mechanical_energy(const StateVector& x, const TiltedConfig& cfg,
                         const RobotParams& p) {
  const Vec3 v = x.segment<3>(idx::kVel);
  const Vec3 w = x.segment<3>(idx::kOmega);
  return 0.5 * cfg.mass * v.squaredNorm() + 0.5 * w.dot(cfg.inertia * w) +
         cfg.mass * p.g * x[idx::kZ];
}

StateVector state_at(const Vec3& pos) {
  StateVector x = StateVector::Zero();
  x.segment<3>(idx::kPos) = pos;
  return x;
}

}  // namespace morpho
