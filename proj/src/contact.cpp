#include "morpho/contact.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace morpho {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

std::array<Vec3, 8> hull_corners(const RobotParams& p) {
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) {
    out[i] = Vec3(i & 1 ? p.hull_max.x() : p.hull_min.x(),
                  i & 2 ? p.hull_max.y() : p.hull_min.y(),
                  i & 4 ? p.hull_max.z() : p.hull_min.z());
  }
  return out;
}

// Lowest point of a disk along -n.
double disk_low(const Vec3& center, const Vec3& axis, const Vec3& n, double r) {
  const double na = n.dot(axis);
  return n.dot(center) - r * std::sqrt(std::max(0.0, 1.0 - na * na));
}

Vec3 disk_low_point(const Vec3& center, const Vec3& axis, const Vec3& n, double r) {
  const Vec3 in_plane = n - n.dot(axis) * axis;
  if (in_plane.norm() < 1e-12) return center;
  return center - r * in_plane.normalized();
}

// Clearances in the body frame with the body aligned to the surface, relative
// to the CoM.
Clearance aligned_clearance(double phi, const RobotParams& p) {
  const TiltedConfig cfg = configure(p, phi);
  const Vec3 n = Vec3::UnitZ();
  Clearance c{1e9, 1e9};
  for (int i = 0; i < 4; ++i) {
    c.wheels = std::min(c.wheels, disk_low(cfg.rotor_pos[i], cfg.rotor_axis[i], n,
                                           p.wheel_radius));
  }
  for (const Vec3& corner : hull_corners(p)) {
    c.hull = std::min(c.hull, n.dot(corner - cfg.com));
  }
  return c;
}

}  // namespace

Vec3 Surface::normal() const { return {-std::sin(slope), 0.0, std::cos(slope)}; }

Mat3 Surface::frame() const {
  Mat3 f;
  f.col(0) = Vec3(std::cos(slope), 0.0, std::sin(slope));
  f.col(1) = Vec3::UnitY();
  f.col(2) = normal();
  return f;
}

double Surface::height_at(double x) const { return z_g + std::tan(slope) * x; }

double Surface::distance(const Vec3& p) const {
  return normal().dot(p - Vec3(0.0, 0.0, z_g));
}

Vec3 Surface::to_world(double s, double y, double h) const {
  return Vec3(0.0, 0.0, z_g) + frame() * Vec3(s, y, h);
}

double Surface::along(const Vec3& p) const {
  return frame().col(0).dot(p - Vec3(0.0, 0.0, z_g));
}

Clearance clearance(const StateVector& x, double phi, const Surface& surface,
                    const RobotParams& params) {
  const TiltedConfig cfg = configure(params, phi);
  const Mat3 r = rotation_from_euler(x[idx::kYaw], x[idx::kPitch], x[idx::kRoll]);
  const Vec3 pos = x.segment<3>(idx::kPos);
  const Vec3 n = surface.normal();
  const Vec3 origin(0.0, 0.0, surface.z_g);
  Clearance c{1e9, 1e9};
  for (int i = 0; i < 4; ++i) {
    const Vec3 center = pos + r * cfg.rotor_pos[i] - origin;
    c.wheels = std::min(c.wheels, disk_low(center, r * cfg.rotor_axis[i], n,
                                           params.wheel_radius));
  }
  for (const Vec3& corner : hull_corners(params)) {
    c.hull = std::min(c.hull, n.dot(pos + r * (corner - cfg.com) - origin));
  }
  return c;
}

double rest_height(double phi, const RobotParams& params) {
  const Clearance c = aligned_clearance(phi, params);
  return -std::min(c.wheels, c.hull);
}

double rotor_plane_height(const StateVector& x, double phi, const Surface& surface,
                          const RobotParams& params) {
  const TiltedConfig cfg = configure(params, phi);
  const Mat3 r = rotation_from_euler(x[idx::kYaw], x[idx::kPitch], x[idx::kRoll]);
  const Vec3 pos = x.segment<3>(idx::kPos);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) sum += surface.distance(pos + r * cfg.rotor_pos[i]);
  return 0.25 * sum;
}

LandingCheck landing_check(double phi, double slope, const RobotParams& params) {
  LandingCheck check;
  const Clearance c = aligned_clearance(phi, params);
  check.wheels_below_hull = c.wheels < c.hull;

  // Support rectangle of the wheel contact points around the CoM; the
  // heading on the slope is arbitrary, so the gravity offset of the CoM
  // projection must fit the nearest edge.
  const TiltedConfig cfg = configure(params, phi);
  double x_lo = 1e9, x_hi = -1e9, y_lo = 1e9, y_hi = -1e9;
  for (int i = 0; i < 4; ++i) {
    const Vec3 q = disk_low_point(cfg.rotor_pos[i], cfg.rotor_axis[i], Vec3::UnitZ(),
                                  params.wheel_radius);
    x_lo = std::min(x_lo, q.x());
    x_hi = std::max(x_hi, q.x());
    y_lo = std::min(y_lo, q.y());
    y_hi = std::max(y_hi, q.y());
  }
  const double margin = std::min({-x_lo, x_hi, -y_lo, y_hi});
  const double shift = -std::min(c.wheels, c.hull) * std::tan(std::abs(slope));
  check.statically_stable = shift < margin;
  return check;
}

double phi_min(double slope, const RobotParams& params) {
  const Surface surface{0.0, slope};
  const auto qualifies = [&](double phi) {
    if (!landing_check(phi, slope, params).ok()) return false;
    // Level approach: the wheels must reach the incline before the hull.
    const Clearance c = clearance(StateVector::Zero(), phi, surface, params);
    return c.wheels < c.hull;
  };
  constexpr int kSteps = 900;
  const double half_pi = std::numbers::pi / 2;
  double prev = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double phi = half_pi * i / kSteps;
    if (qualifies(phi)) {
      if (i == 0) return 0.0;
      double lo = prev, hi = phi;
      for (int k = 0; k < 50; ++k) {
        const double mid = 0.5 * (lo + hi);
        (qualifies(mid) ? hi : lo) = mid;
      }
      return hi;
    }
    prev = phi;
  }
  return half_pi + 1.0;
}

const char* contact_name(ContactKind k) {
  switch (k) {
    case ContactKind::kAirborne: return "airborne";
    case ContactKind::kTouchdown: return "touchdown";
    case ContactKind::kTipover: return "tipover";
  }
  return "unknown";
}

ContactResult contact_resolve(const StateVector& x, double phi,
                              const Surface& surface, const RobotParams& params) {
  ContactResult res;
  const Clearance c = clearance(x, phi, surface, params);
  if (std::min(c.wheels, c.hull) > 0.0) return res;

  res.metrics.phi_g = phi * kDeg;
  res.metrics.impact_speed = std::max(0.0, -x[idx::kVz]);
  res.metrics.roll = x[idx::kRoll] * kDeg;
  res.metrics.pitch = x[idx::kPitch] * kDeg;

  res.kind = ContactKind::kTipover;
  if (c.hull <= c.wheels) {
    res.reason = "body strikes the surface before the wheels";
    return res;
  }
  // Attitude is judged against both the level and the local surface; a level
  // approach to an incline and a hop from a settled pose are both fine.
  const Mat3 r = rotation_from_euler(x[idx::kYaw], x[idx::kPitch], x[idx::kRoll]);
  const Mat3 rel = surface.frame().transpose() * r;
  const double rel_roll = std::atan2(rel(2, 1), rel(2, 2)) * kDeg;
  const double rel_pitch = -std::asin(std::clamp(rel(2, 0), -1.0, 1.0)) * kDeg;
  const auto exceeds = [](double roll, double pitch) {
    return std::abs(roll) > kMaxTouchdownAttitudeDeg ||
           std::abs(pitch) > kMaxTouchdownAttitudeDeg;
  };
  if (exceeds(res.metrics.roll, res.metrics.pitch) && exceeds(rel_roll, rel_pitch)) {
    res.reason = "attitude at contact exceeds 15 deg";
    return res;
  }
  const LandingCheck check = landing_check(phi, surface.slope, params);
  if (!check.wheels_below_hull) {
    res.reason = "settled pose rests on the body";
    return res;
  }
  if (!check.statically_stable) {
    res.reason = "CoM outside the wheel footprint on the slope";
    return res;
  }
  res.kind = ContactKind::kTouchdown;
  return res;
}

}  // namespace morpho
