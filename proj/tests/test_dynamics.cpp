#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "morpho/dynamics.hpp"
#include "morpho/errors.hpp"

using namespace morpho;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

StateVector hovering_at(double z) { return state_at(Vec3(0.0, 0.0, z)); }

StateVector random_state(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  StateVector x;
  for (int i = 0; i < 12; ++i) x[i] = scale * unit(rng);
  return x;
}

StateVector mirror(const StateVector& x) {
  StateVector m = x;
  for (int i : {idx::kY, idx::kYaw, idx::kRoll, idx::kVy, idx::kWx, idx::kWz}) m[i] = -x[i];
  return m;
}

AerialInput swap_sides(const AerialInput& u) { return {u[1], u[0], u[3], u[2]}; }

// Brute-force inertia: each component replaced by a cloud of equal point masses
// sampled uniformly inside its solid.
Mat3 point_cloud_inertia(const RobotParams& p, double phi, int samples) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::vector<std::pair<double, Vec3>> points;
  for (const auto& c : p.components) {
    const ComponentPose pose = component_pose(c, phi, p);
    const double m = c.mass / samples;
    for (int k = 0; k < samples; ++k) {
      Vec3 local;
      if (c.shape.kind == Shape::Kind::kBox) {
        local = Vec3(unit(rng), unit(rng), unit(rng)).cwiseProduct(c.shape.size);
      } else {
        double a, b;
        do {
          a = 2.0 * unit(rng);
          b = 2.0 * unit(rng);
        } while (a * a + b * b > 1.0);
        local = Vec3(a * c.shape.radius, b * c.shape.radius, unit(rng) * c.shape.height);
      }
      points.emplace_back(m, pose.centroid + pose.rotation * local);
    }
  }
  Vec3 com = Vec3::Zero();
  double total = 0.0;
  for (const auto& [m, r] : points) {
    com += m * r;
    total += m;
  }
  com /= total;
  Mat3 j = Mat3::Zero();
  for (const auto& [m, r] : points) {
    const Vec3 d = r - com;
    j += m * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
  }
  return j;
}

}  // namespace

TEST_CASE("default airframe") {
  const RobotParams p = RobotParams::defaults();
  CHECK(p.mass() == doctest::Approx(5.5));
  CHECK(p.thrust_to_weight() == doctest::Approx(2.1));
  CHECK(p.components.size() == 7);
  CHECK(p.spin_signs[0] + p.spin_signs[1] + p.spin_signs[2] + p.spin_signs[3] == 0);
  CHECK_NOTHROW(p.validate());

  RobotParams bad = p;
  bad.k_T = 0.2 * p.k_T;  // T/W below 1
  CHECK_THROWS_AS(bad.validate(), InvalidParams);
  bad = p;
  bad.spin_signs = {1, 1, -1, 1};
  CHECK_THROWS_AS(bad.validate(), InvalidParams);
}

TEST_CASE("thrust wrench") {
  const RobotParams p = RobotParams::defaults();

  SUBCASE("symmetric vertical thrust") {
    const Wrench w = thrust_wrench(AerialInput::Constant(0.3), 0.0, p);
    CHECK((w.force - Vec3(0, 0, 4 * p.k_T * 0.3)).norm() < 1e-12);
    CHECK(w.torque.norm() < 1e-12);
  }

  SUBCASE("left/right differential at phi = 0 is pure roll") {
    const Wrench w = thrust_wrench(AerialInput(0.6, 0.4, 0.6, 0.4), 0.0, p);
    CHECK(std::abs(w.force.x()) < 1e-12);
    CHECK(std::abs(w.force.y()) < 1e-12);
    CHECK(std::abs(w.torque.x()) > 0.1);
    CHECK(std::abs(w.torque.y()) < 1e-12);
  }

  SUBCASE("tilted differential couples roll and sideways force") {
    const double phi = 50.0 * kDeg;
    const double u = 0.5, d = 0.05;
    const Wrench w = thrust_wrench(AerialInput(u + d, u - d, u + d, u - d), phi, p);
    // Each side carries two rotors: 2 * 2 k_T d sin(phi).
    CHECK(std::abs(w.force.y()) == doctest::Approx(4 * p.k_T * d * std::sin(phi)));
    CHECK(std::abs(w.torque.x()) > 0.1);
    // More thrust on the left rolls the body right (drift toward -y) while the
    // outward-leaning left axes push it toward +y.
    CHECK(w.torque.x() > 0.0);
    CHECK(w.force.y() > 0.0);
  }

  SUBCASE("no sideways force at phi = 0 for any input") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const AerialInput u(unit(rng), unit(rng), unit(rng), unit(rng));
      const Wrench w = thrust_wrench(u, 0.0, p);
      CHECK(std::abs(w.force.x()) < 1e-12);
      CHECK(std::abs(w.force.y()) < 1e-12);
    }
  }

  SUBCASE("linear in u") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
      const AerialInput a(unit(rng), unit(rng), unit(rng), unit(rng));
      const AerialInput b(unit(rng), unit(rng), unit(rng), unit(rng));
      const double phi = 1.5 * unit(rng);
      const Wrench wa = thrust_wrench(a, phi, p), wb = thrust_wrench(b, phi, p);
      const Wrench wab = thrust_wrench(a + 2.0 * b, phi, p);
      CHECK((wab.force - wa.force - 2.0 * wb.force).norm() < 1e-12);
      CHECK((wab.torque - wa.torque - 2.0 * wb.torque).norm() < 1e-12);
    }
  }

  SUBCASE("ground-effect ratio scales everything") {
    const AerialInput u(0.2, 0.7, 0.4, 0.9);
    const Wrench w1 = thrust_wrench(u, 0.7, p);
    const Wrench w2 = thrust_wrench(u, 0.7, p, 1.2);
    CHECK((w2.force - 1.2 * w1.force).norm() < 1e-12);
    CHECK((w2.torque - 1.2 * w1.torque).norm() < 1e-12);
  }
}

TEST_CASE("composite inertia") {
  const RobotParams p = RobotParams::defaults();

  SUBCASE("symmetric positive definite, mirror-symmetric layout") {
    for (double deg : {0.0, 30.0, 60.0, 90.0}) {
      const Mat3 j = composite_inertia(deg * kDeg, p);
      CHECK((j - j.transpose()).norm() == 0.0);
      Eigen::SelfAdjointEigenSolver<Mat3> es(j);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
      // y -> -y symmetry leaves no xy or yz products
      CHECK(std::abs(j(0, 1)) < 1e-12);
      CHECK(std::abs(j(1, 2)) < 1e-12);
    }
    CHECK(std::abs(composite_inertia(0.0, p)(0, 0) -
                   composite_inertia(std::numbers::pi / 2, p)(0, 0)) > 1e-4);
  }

  SUBCASE("matches a point-mass discretization within 1%") {
    for (double deg : {0.0, 45.0, 90.0}) {
      const Mat3 j = composite_inertia(deg * kDeg, p);
      const Mat3 ref = point_cloud_inertia(p, deg * kDeg, 40000);
      for (int i = 0; i < 3; ++i) {
        CHECK(j(i, i) == doctest::Approx(ref(i, i)).epsilon(0.01));
      }
      CHECK((j - ref).norm() <= 0.01 * ref.norm());
    }
  }

  SUBCASE("point masses on the body and on the hinge axes do not depend on phi") {
    RobotParams q = p;
    for (auto& c : q.components) {
      c.shape.size = Vec3::Zero();
      c.shape.radius = 0.0;
      c.shape.height = 0.0;
      c.offset = c.attachment == Attachment::kBase ? Vec3(0.0, 0.0, 0.0) : Vec3(0.05, 0, 0);
    }
    const Mat3 j0 = composite_inertia(0.0, q);
    for (double deg : {20.0, 55.0, 90.0}) {
      CHECK((composite_inertia(deg * kDeg, q) - j0).norm() < 1e-14);
    }
  }
}

TEST_CASE("equations of motion") {
  const RobotParams p = RobotParams::defaults();

  SUBCASE("free fall") {
    const StateVector dx = eom(hovering_at(1.0), AerialInput::Zero(), 0.0, p);
    StateVector expected = StateVector::Zero();
    expected[idx::kVz] = -p.g;
    CHECK((dx - expected).norm() < 1e-12);
  }

  SUBCASE("hover balance") {
    const double uh = p.mass() * p.g / (4 * p.k_T);
    CHECK(hover_command(p, 0.0) == doctest::Approx(uh));
    CHECK(uh == doctest::Approx(1.0 / 2.1));
    const StateVector dx = eom(hovering_at(1.0), AerialInput::Constant(uh), 0.0, p);
    CHECK(dx.segment<3>(idx::kVel).norm() < 1e-12);
    CHECK(dx.segment<3>(idx::kOmega).norm() < 1e-12);
  }

  SUBCASE("hover-level thrust at 50 deg falls short by 1 - cos(phi)") {
    const double phi = 50.0 * kDeg;
    const double uh = p.mass() * p.g / (4 * p.k_T);
    const StateVector dx = eom(hovering_at(1.0), AerialInput::Constant(uh), phi, p);
    CHECK(dx[idx::kVz] == doctest::Approx(-p.g * (1 - std::cos(phi))));
    CHECK(std::abs(dx[idx::kVx]) < 1e-12);
    CHECK(std::abs(dx[idx::kVy]) < 1e-12);
    // and hover_command compensates
    const StateVector dh = eom(hovering_at(1.0), AerialInput::Constant(hover_command(p, phi)),
                               phi, p);
    CHECK(dh.segment<3>(idx::kVel).norm() < 1e-12);
  }

  SUBCASE("kinematic rows") {
    std::mt19937_64 rng(5);
    const StateVector x = random_state(rng, 0.5);
    const StateVector dx = eom(x, AerialInput::Constant(0.4), 0.3, p);
    CHECK((dx.segment<3>(idx::kPos) - x.segment<3>(idx::kVel)).norm() == 0.0);
  }

  SUBCASE("Euler singularity") {
    StateVector x = hovering_at(1.0);
    x[idx::kPitch] = 89.5 * kDeg;
    CHECK_THROWS_AS(eom(x, AerialInput::Zero(), 0.0, p), EulerSingularity);
    x[idx::kPitch] = -89.0 * kDeg - 1e-12;
    CHECK_THROWS_AS(eom(x, AerialInput::Zero(), 0.0, p), EulerSingularity);
    x[idx::kPitch] = 80.0 * kDeg;
    CHECK_NOTHROW(eom(x, AerialInput::Zero(), 0.0, p));
  }

  SUBCASE("left/right mirror symmetry") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const StateVector x = random_state(rng, 0.6);
      const AerialInput u(unit(rng), unit(rng), unit(rng), unit(rng));
      const double phi = 1.5 * unit(rng);
      CHECK((eom(mirror(x), swap_sides(u), phi, p) - mirror(eom(x, u, phi, p)))
                .cwiseAbs()
                .maxCoeff() <= 1e-9);
    }
    // over a trajectory
    StateVector a = random_state(rng, 0.3), b = mirror(a);
    const AerialInput u(0.7, 0.3, 0.5, 0.45);
    const TiltedConfig cfg = configure(p, 0.8);
    for (int k = 0; k < 500; ++k) {
      a = rk4_step(a, u, cfg, 1e-3, p);
      b = rk4_step(b, swap_sides(u), cfg, 1e-3, p);
    }
    CHECK((mirror(a) - b).cwiseAbs().maxCoeff() <= 1e-9);
  }

  SUBCASE("rotation and Euler angles roundtrip") {
    const Vec3 e(0.4, -0.3, 1.1);
    const Mat3 r = rotation_from_euler(e[0], e[1], e[2]);
    CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-14);
    CHECK((euler_from_rotation(r) - e).norm() < 1e-14);
  }
}

TEST_CASE("RK4 integrator") {
  const RobotParams p = RobotParams::defaults();

  SUBCASE("free fall is exact") {
    StateVector x = hovering_at(10.0);
    for (int k = 0; k < 1000; ++k) x = rk4_step(x, AerialInput::Zero(), 0.0, 1e-3, p);
    CHECK(std::abs(x[idx::kZ] - (10.0 - 4.905)) < 1e-9);
  }

  SUBCASE("no gravity and no thrust leaves the translation uniform") {
    RobotParams q = p;
    q.g = 0.0;
    StateVector x = hovering_at(1.0);
    x.segment<3>(idx::kVel) = Vec3(0.3, -0.2, 0.1);
    const StateVector y = rk4_step(x, AerialInput::Zero(), 0.0, 0.01, q);
    CHECK((y.segment<3>(idx::kVel) - x.segment<3>(idx::kVel)).norm() == 0.0);
    CHECK((y.segment<3>(idx::kPos) - x.segment<3>(idx::kPos) - 0.01 * x.segment<3>(idx::kVel))
              .norm() < 1e-15);
  }

  SUBCASE("fourth-order convergence") {
    const TiltedConfig cfg = configure(p, 0.6);
    StateVector x0 = StateVector::Zero();
    x0.segment<3>(idx::kEuler) = Vec3(0.2, -0.1, 0.15);
    x0.segment<3>(idx::kOmega) = Vec3(1.5, -1.0, 2.0);
    const AerialInput u(0.9, 0.3, 0.6, 0.75);
    const auto run = [&](int steps) {
      StateVector x = x0;
      for (int k = 0; k < steps; ++k) x = rk4_step(x, u, cfg, 0.5 / steps, p);
      return x;
    };
    const StateVector ref = run(1600);
    const double e1 = (run(50) - ref).norm();
    const double e2 = (run(100) - ref).norm();
    CHECK(std::log2(e1 / e2) >= 3.8);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.1));
  }

  SUBCASE("step size limits") {
    CHECK_THROWS_AS(rk4_step(hovering_at(1), AerialInput::Zero(), 0.0, 0.02, p), InvalidParams);
    CHECK_THROWS_AS(rk4_step(hovering_at(1), AerialInput::Zero(), 0.0, 0.0, p), InvalidParams);
  }

  SUBCASE("ballistic energy conservation") {
    for (double phi : {0.0, 0.4, 1.2}) {
      const TiltedConfig cfg = configure(p, phi);
      StateVector x = hovering_at(10.0);
      x.segment<3>(idx::kVel) = Vec3(1.0, -0.5, 3.0);
      x.segment<3>(idx::kOmega) = Vec3(0.8, -0.6, 1.1);
      const double e0 = mechanical_energy(x, cfg, p);
      for (int k = 0; k < 1000; ++k) x = rk4_step(x, AerialInput::Zero(), cfg, 1e-3, p);
      CHECK(std::abs(mechanical_energy(x, cfg, p) - e0) / std::abs(e0) < 1e-6);
    }
  }

  SUBCASE("integrate splits long intervals") {
    const TiltedConfig cfg = configure(p, 0.2);
    StateVector a = hovering_at(3.0);
    for (int k = 0; k < 10; ++k) a = rk4_step(a, AerialInput::Constant(0.3), cfg, 0.01, p);
    const StateVector b = integrate(hovering_at(3.0), AerialInput::Constant(0.3), cfg, 0.1, p);
    CHECK((a - b).norm() < 1e-12);
  }
}

TEST_CASE("critical angle and flight tilt") {
  RobotParams p = RobotParams::defaults();
  CHECK(critical_angle(p) / kDeg == doctest::Approx(61.56).epsilon(1e-4));

  p.k_T = 2.0 * p.mass() * p.g / 4.0;
  CHECK(critical_angle(p) / kDeg == doctest::Approx(60.0));
  p.k_T = p.mass() * p.g / 4.0;
  CHECK(critical_angle(p) == doctest::Approx(0.0));
  p.k_T = 0.9 * p.mass() * p.g / 4.0;
  CHECK_THROWS_AS(critical_angle(p), NoCriticalAngle);

  p = RobotParams::defaults();
  CHECK(max_flight_tilt(p, 1.35) / kDeg == doctest::Approx(50.0).epsilon(0.002));
  CHECK(max_flight_tilt(p, 2.1) == doctest::Approx(0.0));
  CHECK(max_flight_tilt(p, 1.0) == doctest::Approx(critical_angle(p)));
  CHECK_THROWS_AS(max_flight_tilt(p, 2.5), InfeasibleMargin);
}

TEST_CASE("linearization") {
  const RobotParams p = RobotParams::defaults();
  const AerialInput roll_dir(1.0, -1.0, 1.0, -1.0);

  const auto lateral = [&](double phi) {
    const Linearization lin =
        linearize(hovering_at(1.0), AerialInput::Constant(hover_command(p, phi)), phi, p);
    return (lin.b.row(idx::kVy) * roll_dir)(0);
  };
  CHECK(std::abs(lateral(0.0)) < 1e-8);
  const double k50 = lateral(50 * kDeg) / std::sin(50 * kDeg);
  CHECK(std::abs(k50) > 1.0);
  for (double deg : {15.0, 30.0, 65.0, 80.0}) {
    CHECK(lateral(deg * kDeg) / std::sin(deg * kDeg) == doctest::Approx(k50).epsilon(0.01));
  }
  // matches the wrench directly
  CHECK(lateral(50 * kDeg) * p.mass() ==
        doctest::Approx(thrust_wrench(roll_dir, 50 * kDeg, p).force.y()).epsilon(1e-6));

  const Linearization lin = linearize(hovering_at(1.0), AerialInput::Constant(0.5), 0.4, p);
  CHECK((lin.a.block<3, 3>(idx::kPos, idx::kVel) - Mat3::Identity()).norm() < 1e-8);
  CHECK(lin.a.block<3, 3>(idx::kPos, idx::kPos).norm() < 1e-8);
}
