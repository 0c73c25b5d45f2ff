#include "morpho/robot_params.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "morpho/errors.hpp"

namespace morpho {

Mat3 Shape::centroid_inertia(double m) const {
  Mat3 inertia = Mat3::Zero();
  if (kind == Kind::kBox) {
    const double a2 = size.x() * size.x();
    const double b2 = size.y() * size.y();
    const double c2 = size.z() * size.z();
    inertia.diagonal() << m * (b2 + c2) / 12.0, m * (a2 + c2) / 12.0,
        m * (a2 + b2) / 12.0;
  } else {
    const double r2 = radius * radius;
    const double transverse = m * (3.0 * r2 + height * height) / 12.0;
    inertia.diagonal() << transverse, transverse, 0.5 * m * r2;
  }
  return inertia;
}

RobotParams RobotParams::defaults() {
  RobotParams p;
  const double arm = p.arm_length();

  Shape base_shape;
  base_shape.size = Vec3(0.24, 0.18, 0.16);
  Shape arm_shape;
  arm_shape.size = Vec3(0.44, 0.05, 0.04);
  Shape prop_shape;
  prop_shape.kind = Shape::Kind::kCylinder;
  prop_shape.radius = 0.09;
  prop_shape.height = 0.01;

  p.components = {
      {"base", 3.3, base_shape, Attachment::kBase, Vec3(0.0, 0.0, 0.04)},
      {"left_arm", 0.8, arm_shape, Attachment::kLeftArm, Vec3(0.0, arm, 0.0)},
      {"right_arm", 0.8, arm_shape, Attachment::kRightArm, Vec3(0.0, -arm, 0.0)},
      {"prop_fl", 0.15, prop_shape, Attachment::kLeftArm,
       Vec3(p.rotor_x, arm, 0.0)},
      {"prop_fr", 0.15, prop_shape, Attachment::kRightArm,
       Vec3(p.rotor_x, -arm, 0.0)},
      {"prop_rl", 0.15, prop_shape, Attachment::kLeftArm,
       Vec3(-p.rotor_x, arm, 0.0)},
      {"prop_rr", 0.15, prop_shape, Attachment::kRightArm,
       Vec3(-p.rotor_x, -arm, 0.0)},
  };
  p.k_T = p.mass() * p.g * 2.1 / 4.0;
  return p;
}

double RobotParams::mass() const {
  return std::accumulate(
      components.begin(), components.end(), 0.0,
      [](double acc, const InertialComponent& c) { return acc + c.mass; });
}

void RobotParams::validate() const {
  if (components.empty()) throw InvalidParams("no inertial components");
  for (const auto& c : components) {
    if (!(c.mass >= 0.0)) throw InvalidParams("negative component mass: " + c.name);
  }
  if (!(mass() > 0.0)) throw InvalidParams("mass must be positive");
  if (!(g > 0.0)) throw InvalidParams("gravity must be positive");
  if (!(k_T > 0.0)) throw InvalidParams("k_T must be positive");
  if (!(thrust_to_weight() > 1.0)) {
    throw InvalidParams("thrust-to-weight must exceed 1");
  }
  int sum = 0;
  for (int s : spin_signs) {
    if (s != 1 && s != -1) throw InvalidParams("spin signs must be +-1");
    sum += s;
  }
  if (sum != 0) throw InvalidParams("spin signs must sum to zero");
  if (std::abs(tilt_sign_left) != 1 || std::abs(tilt_sign_right) != 1) {
    throw InvalidParams("tilt signs must be +-1");
  }
  if (!(rotor_y > hinge_y && hinge_y >= 0.0)) {
    throw InvalidParams("rotor_y must lie outboard of the hinge");
  }
  if (!(wheel_radius > 0.0) || !(drive_half_base > 0.0)) {
    throw InvalidParams("wheel radius and half wheel base must be positive");
  }
  linkage.validate();
}

bool is_left_rotor(int rotor) { return rotor == 0 || rotor == 2; }

namespace {

Mat3 arm_rotation(Attachment a, double phi, const RobotParams& p) {
  const double sign = a == Attachment::kLeftArm ? p.tilt_sign_left
                                                : p.tilt_sign_right;
  return Eigen::AngleAxisd(sign * phi, Vec3::UnitX()).toRotationMatrix();
}

Vec3 hinge_point(Attachment a, const RobotParams& p) {
  const double y = a == Attachment::kLeftArm ? p.hinge_y : -p.hinge_y;
  return Vec3(0.0, y, p.rotor_z);
}

}  // namespace

ComponentPose component_pose(const InertialComponent& c, double phi,
                             const RobotParams& p) {
  ComponentPose pose;
  if (c.attachment == Attachment::kBase) {
    pose.centroid = c.offset;
    return pose;
  }
  pose.rotation = arm_rotation(c.attachment, phi, p);
  pose.centroid = hinge_point(c.attachment, p) + pose.rotation * c.offset;
  return pose;
}

Vec3 rotor_position(int rotor, double phi, const RobotParams& p) {
  const bool left = is_left_rotor(rotor);
  const auto arm = left ? Attachment::kLeftArm : Attachment::kRightArm;
  const double x = rotor < 2 ? p.rotor_x : -p.rotor_x;
  const Vec3 offset(x, left ? p.arm_length() : -p.arm_length(), 0.0);
  return hinge_point(arm, p) + arm_rotation(arm, phi, p) * offset;
}

Vec3 rotor_axis(int rotor, double phi, const RobotParams& p) {
  const auto arm = is_left_rotor(rotor) ? Attachment::kLeftArm
                                        : Attachment::kRightArm;
  return arm_rotation(arm, phi, p) * Vec3::UnitZ();
}

TiltedConfig configure(const RobotParams& p, double phi) {
  TiltedConfig cfg;
  cfg.phi = phi;
  cfg.mass = p.mass();

  std::vector<ComponentPose> poses;
  poses.reserve(p.components.size());
  Vec3 moment = Vec3::Zero();
  for (const auto& c : p.components) {
    poses.push_back(component_pose(c, phi, p));
    moment += c.mass * poses.back().centroid;
  }
  cfg.com = moment / cfg.mass;

  Mat3 inertia = Mat3::Zero();
  for (std::size_t i = 0; i < p.components.size(); ++i) {
    const auto& c = p.components[i];
    const auto& pose = poses[i];
    const Vec3 d = pose.centroid - cfg.com;
    inertia += pose.rotation * c.shape.centroid_inertia(c.mass) *
                   pose.rotation.transpose() +
               c.mass * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
  }
  // Remove round-off asymmetry so mirror tests see an exactly symmetric tensor.
  cfg.inertia = 0.5 * (inertia + inertia.transpose());
  cfg.inertia_inv = cfg.inertia.inverse();

  for (int i = 0; i < 4; ++i) {
    cfg.rotor_pos[i] = rotor_position(i, phi, p) - cfg.com;
    cfg.rotor_axis[i] = rotor_axis(i, phi, p);
  }
  return cfg;
}

}  // namespace morpho
