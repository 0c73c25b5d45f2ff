#pragma once

#include <Eigen/Core>

#include "morpho/robot_params.hpp"

namespace morpho {

/// (x, y, z, theta_z, theta_y, theta_x, v_x, v_y, v_z, omega_x, omega_y, omega_z)
/// Position and velocity of the CoM in the world frame (z up), zyx Euler
/// angles, body-frame angular velocity.
using StateVector = Eigen::Matrix<double, 12, 1>;
/// Normalized rotor commands in [0, 1].
using AerialInput = Eigen::Vector4d;

using StateMatrix = Eigen::Matrix<double, 12, 12>;
using InputMatrix = Eigen::Matrix<double, 12, 4>;

namespace idx {
inline constexpr int kPos = 0;
inline constexpr int kEuler = 3;  // theta_z, theta_y, theta_x
inline constexpr int kVel = 6;
inline constexpr int kOmega = 9;
inline constexpr int kX = 0, kY = 1, kZ = 2;
inline constexpr int kYaw = 3, kPitch = 4, kRoll = 5;
inline constexpr int kVx = 6, kVy = 7, kVz = 8;
inline constexpr int kWx = 9, kWy = 10, kWz = 11;
}  // namespace idx

struct Wrench {
  Vec3 force = Vec3::Zero();   // body frame, N
  Vec3 torque = Vec3::Zero();  // body frame about the CoM, N m
};

/// Rotation body -> world for zyx Euler angles (yaw, pitch, roll).
Mat3 rotation_from_euler(double yaw, double pitch, double roll);
/// Inverse of rotation_from_euler, pitch in (-pi/2, pi/2).
Vec3 euler_from_rotation(const Mat3& r);

Wrench thrust_wrench(const AerialInput& u, const TiltedConfig& cfg,
                     const RobotParams& params, double ge_ratio = 1.0);
Wrench thrust_wrench(const AerialInput& u, double phi, const RobotParams& params,
                     double ge_ratio = 1.0);

Mat3 composite_inertia(double phi, const RobotParams& params);

/// Time derivative of the state. Throws EulerSingularity when |pitch| >= 89 deg.
/// `external` is an additional body-frame wrench about the CoM (disturbances).
StateVector eom(const StateVector& x, const AerialInput& u,
                const TiltedConfig& cfg, const RobotParams& params,
                double ge_ratio = 1.0, const Wrench& external = {});
StateVector eom(const StateVector& x, const AerialInput& u, double phi,
                const RobotParams& params, double ge_ratio = 1.0);

/// Classical RK4 step, dt in (0, 0.01]; InvalidParams otherwise.
StateVector rk4_step(const StateVector& x, const AerialInput& u,
                     const TiltedConfig& cfg, double dt,
                     const RobotParams& params, double ge_ratio = 1.0,
                     const Wrench& external = {});
StateVector rk4_step(const StateVector& x, const AerialInput& u, double phi,
                     double dt, const RobotParams& params,
                     double ge_ratio = 1.0);

/// Integrates over an interval of arbitrary length with equal RK4 substeps
/// no longer than `max_step`.
StateVector integrate(const StateVector& x, const AerialInput& u,
                      const TiltedConfig& cfg, double duration,
                      const RobotParams& params, double ge_ratio = 1.0,
                      double max_step = 0.01);

/// Tilt at which full thrust exactly balances weight: arccos(m g / (4 k_T)).
double critical_angle(const RobotParams& params);

/// Largest in-flight tilt keeping `margin` times the weight available:
/// arccos(margin / thrust_to_weight).
double max_flight_tilt(const RobotParams& params, double margin);

/// Rotor command that balances weight at tilt phi, clamped to [0, 1].
double hover_command(const RobotParams& params, double phi,
                     double ge_ratio = 1.0);

struct Linearization {
  StateMatrix a;
  InputMatrix b;
};

/// Central finite-difference Jacobians of eom (step 1e-6).
Linearization linearize(const StateVector& x, const AerialInput& u, double phi,
                        const RobotParams& params, double ge_ratio = 1.0);

/// 0.5 m |v|^2 + 0.5 w^T J w + m g z.
double mechanical_energy(const StateVector& x, const TiltedConfig& cfg,
                         const RobotParams& params);

/// State at rest at position p with zero attitude.
StateVector state_at(const Vec3& p);

}  // namespace morpho
