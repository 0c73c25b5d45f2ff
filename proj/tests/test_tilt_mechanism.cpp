#include <doctest.h>

#include <cmath>
#include <numbers>

#include "morpho/errors.hpp"
#include "morpho/tilt_mechanism.hpp"

using namespace morpho;
using namespace morpho::tilt;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

// Independent oracle: bisection on the x-closure for theta in [0, pi], then x
// from the y-closure.
double oracle_x(double phi, const LinkageGeometry& g, double* theta_out = nullptr) {
  const double target = g.dx - g.h - g.d2 * std::cos(phi);
  double lo = 0.0, hi = kPi;  // d1 cos(theta) decreasing on [0, pi]
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g.d1 * std::cos(mid) > target) lo = mid; else hi = mid;
  }
  const double theta = 0.5 * (lo + hi);
  if (theta_out) *theta_out = theta;
  return g.dy - g.d1 * std::sin(theta) + g.d2 * std::sin(phi);
}

double max_residual(const LinkageGeometry& g, double x, const LinkageSolution& s) {
  const auto r = closure_residual(g, x, s.theta, s.phi);
  return std::max(std::abs(r[0]), std::abs(r[1]));
}

}  // namespace

TEST_CASE("drone configuration endpoint") {
  const LinkageGeometry g;
  double theta = 0.0;
  const double x0 = oracle_x(0.0, g, &theta);
  CHECK(x0 == doctest::Approx(-0.065).epsilon(0.01));
  CHECK(theta / kDeg == doctest::Approx(83.37).epsilon(1e-3));

  const auto s = solve_forward(x0, g);
  CHECK(std::abs(s.phi) < 1e-7);
  CHECK(s.theta / kDeg == doctest::Approx(83.37).epsilon(1e-3));
  CHECK(std::abs(solve_inverse(0.0, g) - x0) < 1e-4);
}

TEST_CASE("drive configuration endpoint") {
  const LinkageGeometry g;
  double theta = 1.0;
  const double x90 = oracle_x(kPi / 2, g, &theta);
  CHECK(x90 == doctest::Approx(9.7).epsilon(1e-3));
  CHECK(std::abs(theta) < 1e-7);  // bisection on cos near 1
  CHECK(std::abs(solve_inverse(kPi / 2, g) - x90) < 1e-4);
  const auto s = solve_forward(x90, g);
  CHECK(s.phi == doctest::Approx(kPi / 2).epsilon(1e-9));
}

TEST_CASE("degenerate single link flags points off the d1 circle") {
  LinkageGeometry g;
  g.d2 = 0.0;
  const double a = g.dx - g.h;
  const double on_circle = g.dy - std::sqrt(g.d1 * g.d1 - a * a);
  CHECK_NOTHROW(solve_forward(on_circle, g));
  CHECK_THROWS_AS(solve_forward(on_circle + 0.5, g), InfeasibleDisplacement);
  CHECK_THROWS_AS(solve_forward(-20.0, g), InfeasibleDisplacement);
}

TEST_CASE("displacements outside the operating range are infeasible") {
  const LinkageGeometry g;
  CHECK_THROWS_AS(solve_forward(-1.0, g), InfeasibleDisplacement);
  CHECK_THROWS_AS(solve_forward(12.0, g), InfeasibleDisplacement);
  CHECK_THROWS_AS(solve_inverse(-0.1, g), InfeasibleDisplacement);
  CHECK_THROWS_AS(solve_inverse(2.0, g), InfeasibleDisplacement);
}

TEST_CASE("invalid geometry") {
  LinkageGeometry g;
  g.d1 = 0.0;
  CHECK_THROWS_AS(g.validate(), InvalidParams);
  g = {};
  g.pitch = -1.0;
  CHECK_THROWS_AS(g.validate(), InvalidParams);
  g = {};
  g.counts_per_rev = 0.0;
  CHECK_THROWS_AS(g.validate(), InvalidParams);
}

TEST_CASE("roundtrip and closure over the range") {
  const LinkageGeometry g;
  for (int i = 0; i < 100; ++i) {
    const double phi = (kPi / 2) * i / 99.0;
    const double x = solve_inverse(phi, g);
    CHECK(std::abs(x - oracle_x(phi, g)) < 1e-9);
    const auto s = solve_forward(x, g);
    CHECK(std::abs(s.phi - phi) < 1e-9);
    CHECK(max_residual(g, x, s) < 1e-10);
  }
}

TEST_CASE("continuation seed stays on the physical branch") {
  const LinkageGeometry g;
  double phi = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double target = (kPi / 2) * i / 200.0;
    const double x = solve_inverse(target, g);
    const auto s = solve_forward(x, g, phi);
    CHECK(std::abs(s.phi - target) < 1e-9);
    phi = s.phi;
  }
  // A seed on the wrong side of the range still returns the physical root.
  const double x = solve_inverse(0.3, g);
  CHECK(std::abs(solve_forward(x, g, 1.5).phi - 0.3) < 1e-9);
}

TEST_CASE("phi is monotone in displacement") {
  const TiltMechanism m;
  double prev = -1.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = m.x_zero() + (m.x_max() - m.x_zero()) * i / 2000.0;
    const double phi = solve_forward(x, m.geometry()).phi;
    CHECK(phi > prev);
    prev = phi;
  }
}

TEST_CASE("encoder mapping") {
  const TiltMechanism m;
  CHECK(std::abs(m.encoder_to_tilt(0.0)) < 1e-12);
  CHECK(m.state_from_encoder(0).tilt_phi == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m.encoder_to_displacement(1632.67) - m.encoder_to_displacement(0.0) ==
        doctest::Approx(0.8).epsilon(1e-14));

  // affine: the increment does not depend on where it starts
  const double step = m.encoder_to_displacement(500.0) - m.encoder_to_displacement(0.0);
  for (double a : {-300.0, 0.0, 1234.0, 17000.0}) {
    CHECK(std::abs(m.encoder_to_displacement(a + 500.0) - m.encoder_to_displacement(a) -
                   step) < 1e-12);
  }

  const long mid = m.tilt_to_encoder(kPi / 4);
  const double x_mid = m.encoder_to_displacement(static_cast<double>(mid));
  const auto st = m.state_from_encoder(mid);
  CHECK(st.displacement_x == doctest::Approx(x_mid));
  CHECK(std::abs(st.tilt_phi - kPi / 4) < 1e-3);  // one count of quantization
  CHECK(max_residual(m.geometry(), st.displacement_x, {st.internal_theta, st.tilt_phi}) <
        1e-10);
  // phi from the oracle at the same displacement
  double lo = 0.0, hi = kPi / 2;
  for (int i = 0; i < 200; ++i) {
    const double p = 0.5 * (lo + hi);
    if (oracle_x(p, m.geometry()) < x_mid) lo = p; else hi = p;
  }
  CHECK(std::abs(st.tilt_phi - 0.5 * (lo + hi)) < 1e-9);

  CHECK_THROWS_AS(m.encoder_to_tilt(-5000.0), InfeasibleDisplacement);
  CHECK_THROWS_AS(m.encoder_to_tilt(1e6), InfeasibleDisplacement);
}

TEST_CASE("tilt integrator") {
  CHECK(tilt_integrate(0.5, 0.0, 0.01, 1.0) == 0.5);
  CHECK(tilt_integrate(0.8, 1.0, 0.01, 0.805) == 0.805);
  CHECK(tilt_integrate(0.5, 0.2, 0.01, 1.0) == doctest::Approx(0.502).epsilon(1e-15));
  CHECK(tilt_integrate(0.001, -1.0, 0.01, 1.0) == 0.0);
}
