#include "morpho/tilt_mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "morpho/errors.hpp"

namespace morpho::tilt {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kResidualTol = 1e-12;  // cm
constexpr double kFeasibilityTol = 1e-9;  // cm^2
constexpr int kNewtonIters = 30;
constexpr int kBisectionIters = 200;

// Closure reduced to a scalar equation in phi by eliminating theta:
//   (dx - h - d2 cos phi)^2 + (dy - x + d2 sin phi)^2 - d1^2 = 0.
// Strictly increasing in phi along the physical branch.
double reduced_residual(const LinkageGeometry& g, double x, double phi) {
  const double a = g.dx - g.h - g.d2 * std::cos(phi);
  const double b = g.dy - x + g.d2 * std::sin(phi);
  return a * a + b * b - g.d1 * g.d1;
}

double theta_from_phi(const LinkageGeometry& g, double x, double phi) {
  const double a = g.dx - g.h - g.d2 * std::cos(phi);
  const double b = g.dy - x + g.d2 * std::sin(phi);
  return std::atan2(b, a);
}

double max_abs(const std::array<double, 2>& r) {
  return std::max(std::abs(r[0]), std::abs(r[1]));
}

// Newton on the 2x2 closure system. Returns nullopt if it fails to settle.
std::optional<LinkageSolution> newton(const LinkageGeometry& g, double x,
                                      LinkageSolution s) {
  for (int it = 0; it < kNewtonIters; ++it) {
    const auto r = closure_residual(g, x, s.theta, s.phi);
    if (max_abs(r) < kResidualTol) return s;
    // d r / d(theta, phi)
    const double j00 = -g.d1 * std::sin(s.theta);
    const double j01 = -g.d2 * std::sin(s.phi);
    const double j10 = g.d1 * std::cos(s.theta);
    const double j11 = -g.d2 * std::cos(s.phi);
    const double det = j00 * j11 - j01 * j10;
    if (std::abs(det) < 1e-14) return std::nullopt;
    const double dtheta = (j11 * r[0] - j01 * r[1]) / det;
    const double dphi = (-j10 * r[0] + j00 * r[1]) / det;
    s.theta -= dtheta;
    s.phi -= dphi;
    if (!std::isfinite(s.theta) || !std::isfinite(s.phi)) return std::nullopt;
  }
  const auto r = closure_residual(g, x, s.theta, s.phi);
  if (max_abs(r) < kResidualTol) return s;
  return std::nullopt;
}

double bisect_phi(const LinkageGeometry& g, double x, double lo, double hi,
                  double tol) {
  for (int it = 0; it < kBisectionIters && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (reduced_residual(g, x, mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void LinkageGeometry::validate() const {
  if (!(h > 0.0 && d1 > 0.0 && d2 >= 0.0)) {
    throw InvalidParams("linkage lengths must be positive");
  }
  if (!(pitch > 0.0) || !(counts_per_rev > 0.0)) {
    throw InvalidParams("pitch and counts_per_rev must be positive");
  }
}

std::array<double, 2> closure_residual(const LinkageGeometry& g, double x,
                                       double theta, double phi) {
  return {g.h + g.d1 * std::cos(theta) + g.d2 * std::cos(phi) - g.dx,
          x + g.d1 * std::sin(theta) - g.d2 * std::sin(phi) - g.dy};
}

LinkageSolution solve_forward(double x, const LinkageGeometry& g,
                              std::optional<double> phi_seed) {
  g.validate();

  if (g.d2 == 0.0) {
    // phi no longer enters the closure: B must lie on the circle of radius d1.
    const double a = g.dx - g.h;
    const double b = g.dy - x;
    if (std::abs(std::hypot(a, b) - g.d1) > 1e-9) {
      throw InfeasibleDisplacement(
          fmt::format("x = {} cm is off the circle reachable by d1", x));
    }
    return {std::atan2(b, a), 0.0};
  }

  const double f_lo = reduced_residual(g, x, 0.0);
  const double f_hi = reduced_residual(g, x, kHalfPi);
  if (f_lo > kFeasibilityTol || f_hi < -kFeasibilityTol) {
    throw InfeasibleDisplacement(fmt::format(
        "x = {} cm is outside the tilt range [0, 90] deg", x));
  }

  LinkageSolution guess;
  if (phi_seed) {
    guess.phi = std::clamp(*phi_seed, 0.0, kHalfPi);
  } else {
    guess.phi = bisect_phi(g, x, 0.0, kHalfPi, 1e-3);
  }
  guess.theta = theta_from_phi(g, x, guess.phi);

  if (auto s = newton(g, x, guess);
      s && s->phi > -1e-9 && s->phi < kHalfPi + 1e-9 && s->theta > -1e-6) {
    return *s;
  }

  // Seed drifted onto another branch: bracket on the reduced residual and
  // polish from there.
  guess.phi = bisect_phi(g, x, 0.0, kHalfPi, 1e-15);
  guess.theta = theta_from_phi(g, x, guess.phi);
  if (auto s = newton(g, x, guess)) return *s;
  if (max_abs(closure_residual(g, x, guess.theta, guess.phi)) < 1e-10) {
    return guess;
  }
  throw NonConvergence(fmt::format("closure solve failed at x = {} cm", x));
}

double solve_inverse(double phi, const LinkageGeometry& g) {
  g.validate();
  if (!(phi >= -1e-12 && phi <= kHalfPi + 1e-12)) {
    throw InfeasibleDisplacement(
        fmt::format("phi = {} rad outside [0, pi/2]", phi));
  }
  // theta from the x-closure equation, then x from the y-closure equation.
  double c = (g.dx - g.h - g.d2 * std::cos(phi)) / g.d1;
  if (c > 1.0 + 1e-12 || c < -1.0 - 1e-12) {
    throw InfeasibleDisplacement(
        fmt::format("phi = {} rad not reachable by this linkage", phi));
  }
  c = std::clamp(c, -1.0, 1.0);
  const double theta = std::acos(c);
  const double x = g.dy - g.d1 * std::sin(theta) + g.d2 * std::sin(phi);
  if (!std::isfinite(x)) {
    throw NonConvergence(fmt::format("inverse solve failed at phi = {}", phi));
  }
  return x;
}

double tilt_integrate(double phi, double rate, double dt, double phi_limit) {
  return std::clamp(phi + rate * dt, 0.0, phi_limit);
}

TiltMechanism::TiltMechanism(const LinkageGeometry& geom)
    : geom_(geom),
      x_zero_(solve_inverse(0.0, geom)),
      x_max_(solve_inverse(kHalfPi, geom)) {}

double TiltMechanism::encoder_to_displacement(double count) const {
  return x_zero_ + geom_.pitch * count / geom_.counts_per_rev;
}

double TiltMechanism::displacement_to_encoder(double x) const {
  return (x - x_zero_) * geom_.counts_per_rev / geom_.pitch;
}

double TiltMechanism::encoder_to_tilt(double count) const {
  // Rounding at the endpoints can leave phi a few ulps outside the range.
  const double phi = solve_forward(encoder_to_displacement(count), geom_).phi;
  return std::clamp(phi, 0.0, kHalfPi);
}

long TiltMechanism::tilt_to_encoder(double phi) const {
  return std::lround(displacement_to_encoder(solve_inverse(phi, geom_)));
}

MechanismState TiltMechanism::state_from_encoder(long count) const {
  MechanismState s;
  s.encoder_count = count;
  s.displacement_x = encoder_to_displacement(static_cast<double>(count));
  const auto sol = solve_forward(s.displacement_x, geom_);
  s.internal_theta = sol.theta;
  s.tilt_phi = sol.phi;
  return s;
}

}  // namespace morpho::tilt
