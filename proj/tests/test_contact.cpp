#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "morpho/contact.hpp"

using namespace morpho;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const RobotParams& params() {
  static const RobotParams p = RobotParams::defaults();
  return p;
}

// CoM placed so the lowest wheel point sits `gap` above a flat surface.
StateVector level_at_gap(double phi, double gap) {
  const Clearance c = clearance(StateVector::Zero(), phi, Surface{}, params());
  StateVector x = StateVector::Zero();
  x[idx::kZ] = -c.wheels + gap;
  return x;
}

}  // namespace

TEST_CASE("surface geometry") {
  const Surface s{0.2, 25 * kDeg};
  CHECK(s.normal().norm() == doctest::Approx(1.0));
  const Mat3 f = s.frame();
  CHECK((f.transpose() * f - Mat3::Identity()).norm() < 1e-15);
  CHECK(f.determinant() == doctest::Approx(1.0));
  const Vec3 p = s.to_world(0.7, -0.3, 0.25);
  CHECK(s.distance(p) == doctest::Approx(0.25));
  CHECK(s.along(p) == doctest::Approx(0.7));
  CHECK(s.distance(Vec3(1.0, 0.0, s.height_at(1.0))) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("rest height grows with tilt once the wheels carry the body") {
  // below phi_min the hull is the low point and tilting the arms lowers the CoM
  double prev = 0.0;
  for (double deg = 15.0; deg <= 90.0; deg += 5.0) {
    REQUIRE(deg * kDeg >= phi_min(0.0, params()));
    const double h = rest_height(deg * kDeg, params());
    CHECK(h > prev);
    prev = h;
  }
}

TEST_CASE("flat ground landings") {
  SUBCASE("airborne above the ground") {
    const ContactResult r = contact_resolve(level_at_gap(65 * kDeg, 0.01), 65 * kDeg, Surface{},
                                            params());
    CHECK(r.kind == ContactKind::kAirborne);
  }

  SUBCASE("wheels first at 65 deg") {
    StateVector x = level_at_gap(65 * kDeg, -1e-4);
    x[idx::kVz] = -0.3;
    const ContactResult r = contact_resolve(x, 65 * kDeg, Surface{}, params());
    CHECK(r.kind == ContactKind::kTouchdown);
    CHECK(r.metrics.phi_g == doctest::Approx(65.0));
    CHECK(r.metrics.impact_speed == doctest::Approx(0.3));
  }

  SUBCASE("level contact at rest records zero impact speed") {
    const ContactResult r = contact_resolve(level_at_gap(60 * kDeg, -1e-4), 60 * kDeg,
                                            Surface{}, params());
    CHECK(r.kind == ContactKind::kTouchdown);
    CHECK(r.metrics.impact_speed == 0.0);
    CHECK(r.metrics.roll == 0.0);
  }

  SUBCASE("steep attitude tips over") {
    StateVector x = level_at_gap(65 * kDeg, 0.0);
    x[idx::kRoll] = 25 * kDeg;
    x[idx::kZ] += 0.3;
    // lower until something touches
    while (contact_resolve(x, 65 * kDeg, Surface{}, params()).kind == ContactKind::kAirborne) {
      x[idx::kZ] -= 1e-4;
    }
    const ContactResult r = contact_resolve(x, 65 * kDeg, Surface{}, params());
    CHECK(r.kind == ContactKind::kTipover);
  }

  SUBCASE("quadrotor configuration rests on the body") {
    CHECK(!landing_check(0.0, 0.0, params()).wheels_below_hull);
    CHECK(landing_check(60 * kDeg, 0.0, params()).ok());
  }
}

TEST_CASE("slope landings") {
  const Surface slope{0.0, 25 * kDeg};

  const auto descend_level = [&](double phi) {
    StateVector x = StateVector::Zero();
    x[idx::kZ] = 1.0;
    ContactResult r;
    while ((r = contact_resolve(x, phi, slope, params())).kind == ContactKind::kAirborne) {
      x[idx::kZ] -= 1e-4;
    }
    return r;
  };

  CHECK(descend_level(0.0).kind == ContactKind::kTipover);
  const ContactResult morphed = descend_level(62 * kDeg);
  CHECK(morphed.kind == ContactKind::kTouchdown);

  // aligned with the incline at the same tilt
  StateVector x = StateVector::Zero();
  x[idx::kPitch] = -25 * kDeg;
  const Vec3 p = slope.to_world(0.0, 0.0, rest_height(62 * kDeg, params()) - 1e-4);
  x.segment<3>(idx::kPos) = p;
  CHECK(contact_resolve(x, 62 * kDeg, slope, params()).kind == ContactKind::kTouchdown);
}

TEST_CASE("minimum landing tilt") {
  const double flat = phi_min(0.0, params());
  CHECK(flat > 0.0);
  CHECK(!landing_check(0.5 * flat, 0.0, params()).ok());
  CHECK(landing_check(flat + 1e-6, 0.0, params()).ok());
  double prev = flat;
  for (double deg : {10.0, 25.0, 45.0, 70.0, 80.0}) {
    const double m = phi_min(deg * kDeg, params());
    CHECK(m >= prev);
    prev = m;
  }
  CHECK(phi_min(25 * kDeg, params()) < 60 * kDeg);
  // too steep for any tilt
  CHECK(phi_min(80 * kDeg, params()) > std::numbers::pi / 2);
}
