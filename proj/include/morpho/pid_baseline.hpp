#pragma once

#include <Eigen/Core>

#include "morpho/dynamics.hpp"

namespace morpho {

/// Gains of the cascaded baseline, tuned once for hover at phi = 0.
struct PidGains {
  Vec3 pos_kp{4.0, 4.0, 6.0};   // 1/s^2
  Vec3 pos_kd{4.0, 4.0, 5.0};   // 1/s
  Vec3 pos_ki{0.5, 0.5, 1.0};   // 1/s^3
  Vec3 att_kp{144.0, 144.0, 16.0};  // 1/s^2
  Vec3 att_kd{19.2, 19.2, 8.0};     // 1/s
  double max_tilt = 0.35;       // rad, attitude command limit
  double integral_limit = 0.5;  // m s
};

/// Outer position loop producing roll/pitch/collective, inner attitude loop
/// producing body torques, and a mixer that assumes vertical thrust axes
/// (the phi = 0 geometry) regardless of the actual tilt.
class PidBaseline {
 public:
  PidBaseline(const RobotParams& params, double dt, PidGains gains = {});

  AerialInput step(const StateVector& x_hat, const StateVector& x_ref, double phi);
  void reset() { integral_.setZero(); }

 private:
  RobotParams params_;
  PidGains gains_;
  double dt_;
  double mass_;
  Mat3 inertia0_;
  Eigen::Matrix4d mixer_inv_;
  Vec3 integral_ = Vec3::Zero();
};

}  // namespace morpho
