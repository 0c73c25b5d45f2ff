#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "morpho/tilt_mechanism.hpp"

namespace morpho {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Which body a component rides on. Arm-mounted components rotate with the
/// tilt angle about the arm hinge axis (parallel to body x).
enum class Attachment { kBase, kLeftArm, kRightArm };

/// Solid shape used both for the analytic inertia and for point-mass
/// discretization in tests. Cylinders have their axis along local z.
struct Shape {
  enum class Kind { kBox, kCylinder } kind = Kind::kBox;
  Vec3 size = Vec3::Zero();  // box edge lengths
  double radius = 0.0;       // cylinder
  double height = 0.0;       // cylinder

  /// Principal inertia about the centroid for the given mass.
  Mat3 centroid_inertia(double mass) const;
};

struct InertialComponent {
  std::string name;
  double mass = 0.0;
  Shape shape;
  Attachment attachment = Attachment::kBase;
  Vec3 offset = Vec3::Zero();  // centroid in the attachment frame
};

/// Physical description of the morphing quadrotor.
///
/// Body reference frame: origin at the hinge-plane center, x forward, y left,
/// z up. Rotor order is front-left, front-right, rear-left, rear-right.
/// Geometry, inertia and k_M are estimates sized to a 5.5 kg airframe that is
/// 16 cm x 65 cm in flight and 33 cm x 30 cm in drive configuration.
struct RobotParams {
  double g = 9.81;
  double k_T = 0.0;    // N at full command, per rotor
  double k_M = 0.016;  // m, drag moment per unit thrust

  // Rotor centers in flight configuration: (+-rotor_x, +-rotor_y, rotor_z).
  double rotor_x = 0.17;
  double rotor_y = 0.20;
  double rotor_z = 0.0;
  double hinge_y = 0.11;  // arm hinge axes at (., +-hinge_y, rotor_z)

  std::array<int, 4> spin_signs{+1, -1, -1, +1};
  // Rotation sign about body x applied to each arm; with (-1, +1) both thrust
  // axes lean outward so the rotor jets converge beneath the body.
  int tilt_sign_left = -1;
  int tilt_sign_right = +1;

  double wheel_radius = 0.12;
  double drive_half_base = 0.15;  // half wheel base used by the drive model

  // Body hull (axis-aligned box in the body reference frame).
  Vec3 hull_min{-0.12, -0.09, -0.04};
  Vec3 hull_max{0.12, 0.09, 0.12};

  std::vector<InertialComponent> components;

  tilt::LinkageGeometry linkage;

  /// 5.5 kg, thrust-to-weight 2.1 airframe.
  static RobotParams defaults();

  double mass() const;
  double thrust_to_weight() const { return 4.0 * k_T / (mass() * g); }
  double arm_length() const { return rotor_y - hinge_y; }

  /// Throws InvalidParams on violated invariants.
  void validate() const;
};

/// Everything the equations of motion need at a fixed tilt angle, expressed
/// about the composite center of mass.
struct TiltedConfig {
  double phi = 0.0;
  double mass = 0.0;
  Vec3 com = Vec3::Zero();  // CoM in the body reference frame
  Mat3 inertia = Mat3::Identity();
  Mat3 inertia_inv = Mat3::Identity();
  std::array<Vec3, 4> rotor_pos;   // relative to CoM
  std::array<Vec3, 4> rotor_axis;  // unit thrust directions
};

/// Pose of one component at tilt phi in the body reference frame.
struct ComponentPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 centroid = Vec3::Zero();
};

ComponentPose component_pose(const InertialComponent& c, double phi,
                             const RobotParams& params);

/// Rotor center in the body reference frame (not CoM-relative).
Vec3 rotor_position(int rotor, double phi, const RobotParams& params);
Vec3 rotor_axis(int rotor, double phi, const RobotParams& params);
bool is_left_rotor(int rotor);

TiltedConfig configure(const RobotParams& params, double phi);

}  // namespace morpho
