#include "morpho/pid_baseline.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace morpho {

PidBaseline::PidBaseline(const RobotParams& params, double dt, PidGains gains)
    : params_(params), gains_(gains), dt_(dt), mass_(params.mass()) {
  const TiltedConfig flat = configure(params_, 0.0);
  inertia0_ = flat.inertia;
  // (F_z, tau_x, tau_y, tau_z) per unit command of each rotor.
  Eigen::Matrix4d mixer;
  for (int i = 0; i < 4; ++i) {
    const Vec3& r = flat.rotor_pos[i];
    mixer(0, i) = params_.k_T;
    mixer(1, i) = params_.k_T * r.y();
    mixer(2, i) = -params_.k_T * r.x();
    mixer(3, i) = params_.k_T * params_.k_M * params_.spin_signs[i];
  }
  mixer_inv_ = mixer.inverse();
}

AerialInput PidBaseline::step(const StateVector& x, const StateVector& ref,
                              double phi) {
  const Vec3 e_p = ref.segment<3>(idx::kPos) - x.segment<3>(idx::kPos);
  const Vec3 e_v = ref.segment<3>(idx::kVel) - x.segment<3>(idx::kVel);
  integral_ = (integral_ + e_p * dt_)
                  .cwiseMax(-gains_.integral_limit)
                  .cwiseMin(gains_.integral_limit);
  const Vec3 acc = gains_.pos_kp.cwiseProduct(e_p) + gains_.pos_kd.cwiseProduct(e_v) +
                   gains_.pos_ki.cwiseProduct(integral_);

  const double yaw = x[idx::kYaw];
  const double g = params_.g;
  const double pitch_d = std::clamp(
      (acc.x() * std::cos(yaw) + acc.y() * std::sin(yaw)) / g, -gains_.max_tilt,
      gains_.max_tilt);
  const double roll_d = std::clamp(
      (acc.x() * std::sin(yaw) - acc.y() * std::cos(yaw)) / g, -gains_.max_tilt,
      gains_.max_tilt);
  const double yaw_d = ref[idx::kYaw];

  const double tilt_cos =
      std::max(0.5, std::cos(x[idx::kRoll]) * std::cos(x[idx::kPitch]));
  // Collective feed-forward for the tilted arms; the torque mixing below
  // still assumes vertical axes.
  const double f_z = mass_ * (g + acc.z()) / tilt_cos / std::max(0.2, std::cos(phi));

  const Vec3 e_att(roll_d - x[idx::kRoll], pitch_d - x[idx::kPitch],
                   std::remainder(yaw_d - yaw, 2.0 * std::numbers::pi));
  const Vec3 omega = x.segment<3>(idx::kOmega);
  const Vec3 tau = inertia0_ * (gains_.att_kp.cwiseProduct(e_att) -
                                gains_.att_kd.cwiseProduct(omega));

  const Eigen::Vector4d u = mixer_inv_ * Eigen::Vector4d(f_z, tau.x(), tau.y(), tau.z());
  return u.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace morpho
