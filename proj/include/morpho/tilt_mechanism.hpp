#pragma once

#include <array>
#include <optional>

namespace morpho::tilt {

/// Geometry of the closed tilt linkage. Lengths in centimeters.
///
/// Joint A slides along the OA axis (displacement x), link AB (h) is rigid
/// with the slider, BC (d1) is the internal link at angle theta and CD (d2)
/// carries the tilting arm at angle phi about the fixed pivot D = (dx, dy).
struct LinkageGeometry {
  double h = 1.6;
  double d1 = 5.2;
  double d2 = 4.6;
  double dx = 6.8;
  double dy = 5.1;
  double pitch = 0.8;               // cm of travel per output-shaft revolution
  double counts_per_rev = 1632.67;  // encoder counts per output-shaft revolution

  /// Throws InvalidParams when a length, the pitch or the count ratio is not
  /// positive. d2 == 0 is accepted as a degenerate single-link geometry.
  void validate() const;
};

struct LinkageSolution {
  double theta = 0.0;  // rad
  double phi = 0.0;    // rad
};

struct MechanismState {
  long encoder_count = 0;
  double displacement_x = 0.0;  // cm
  double internal_theta = 0.0;  // rad
  double tilt_phi = 0.0;        // rad
};

/// Residual of the two closure equations, in cm.
std::array<double, 2> closure_residual(const LinkageGeometry& geom, double x,
                                       double theta, double phi);

/// Solves the closure equations for (theta, phi) given slider displacement x.
/// The branch returned is the one continuous with the phi = 0 configuration.
/// `phi_seed` enables continuation from a nearby previous solution.
///
/// Throws InfeasibleDisplacement when x is outside the operating range
/// phi in [0, pi/2], NonConvergence when the root cannot be polished.
LinkageSolution solve_forward(double x, const LinkageGeometry& geom,
                              std::optional<double> phi_seed = std::nullopt);

/// Displacement producing tilt angle phi in [0, pi/2].
double solve_inverse(double phi, const LinkageGeometry& geom);

/// Euler step of the self-locking tilt actuator, clamped to [0, phi_limit].
double tilt_integrate(double phi, double rate, double dt, double phi_limit);

/// Linkage plus encoder calibration. x_zero is the displacement at phi = 0
/// and is derived from the geometry on construction.
class TiltMechanism {
 public:
  explicit TiltMechanism(const LinkageGeometry& geom = {});

  const LinkageGeometry& geometry() const { return geom_; }
  double x_zero() const { return x_zero_; }
  double x_max() const { return x_max_; }

  double encoder_to_displacement(double count) const;
  double displacement_to_encoder(double x) const;
  double encoder_to_tilt(double count) const;
  long tilt_to_encoder(double phi) const;

  MechanismState state_from_encoder(long count) const;

 private:
  LinkageGeometry geom_;
  double x_zero_;
  double x_max_;
};

}  // namespace morpho::tilt
