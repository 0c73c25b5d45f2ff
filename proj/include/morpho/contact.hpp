#pragma once

#include <string>

#include "morpho/dynamics.hpp"

namespace morpho {

/// Planar ground through (0, 0, z_g), ascending along +x at `slope` rad.
struct Surface {
  double z_g = 0.0;
  double slope = 0.0;

  Vec3 normal() const;
  /// Rotation from surface coordinates (x along the incline, z normal) to world.
  Mat3 frame() const;
  double height_at(double x) const;
  /// Signed distance of a world point along the surface normal.
  double distance(const Vec3& p) const;
  /// World point of surface coordinates (s, y) lifted by h along the normal.
  Vec3 to_world(double s, double y, double h = 0.0) const;
  /// Surface coordinate along the incline of a world point.
  double along(const Vec3& p) const;
};

/// Lowest wheel rim point and lowest hull corner along the surface normal.
struct Clearance {
  double wheels = 0.0;
  double hull = 0.0;
};

/// Wheels are disks of radius wheel_radius centred on the rotors with their
/// axes along the thrust directions.
Clearance clearance(const StateVector& x, double phi, const Surface& surface,
                    const RobotParams& params);

/// CoM height above the surface when resting on the wheels with the body
/// aligned to the surface.
double rest_height(double phi, const RobotParams& params);

/// Mean distance of the rotor centres from the surface along its normal.
double rotor_plane_height(const StateVector& x, double phi, const Surface& surface,
                          const RobotParams& params);

/// Reasons a landing attempt is rejected.
struct LandingCheck {
  bool wheels_below_hull = true;  // settled pose rests on the wheels
  bool statically_stable = true;  // CoM projection inside the wheel footprint
  bool ok() const { return wheels_below_hull && statically_stable; }
};

/// Settled-pose checks on a slope at tilt phi.
LandingCheck landing_check(double phi, double slope, const RobotParams& params);

/// Smallest tilt for which a landing on the given slope settles on the
/// wheels with a stable CoM. Returns pi/2 + 1 when no tilt qualifies.
double phi_min(double slope, const RobotParams& params);

struct TouchdownMetrics {
  double time = 0.0;          // s
  double phi_g = 0.0;         // deg
  double impact_speed = 0.0;  // m/s, vertical
  double roll = 0.0;          // deg, world
  double pitch = 0.0;         // deg, world
  double max_mean_thrust = 0.0;
  double lateral_drift = 0.0;  // m
};

enum class ContactKind { kAirborne, kTouchdown, kTipover };

const char* contact_name(ContactKind k);

struct ContactResult {
  ContactKind kind = ContactKind::kAirborne;
  TouchdownMetrics metrics;  // phi_g, impact_speed, roll, pitch filled here
  std::string reason;
};

inline constexpr double kMaxTouchdownAttitudeDeg = 15.0;

/// Touchdown when the lowest wheel point reaches the surface. Tipover when the
/// hull reaches it first, when roll or pitch exceeds 15 deg relative to both
/// the level and the surface, or when the settled pose fails landing_check.
ContactResult contact_resolve(const StateVector& x, double phi,
                              const Surface& surface, const RobotParams& params);

}  // namespace morpho
