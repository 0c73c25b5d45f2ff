#pragma once

#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace morpho {

/// Near-ground thrust ratio T(z, phi) / T_inf(phi) sampled on a rectangular
/// (tilt angle, height) grid. Rows follow `angles_deg`, columns `heights`.
struct GroundEffectTable {
  std::vector<double> angles_deg;
  std::vector<double> heights;  // m above the surface, rotor plane
  Eigen::MatrixXd ratio;
  Eigen::MatrixXd sigma;  // relative standard deviation per cell
};

/// Parses `phi_deg,z_m,ratio,sigma` text. Throws ParseError,
/// NonRectangularGrid or NonPositiveRatio.
GroundEffectTable load_table(std::istream& in);
GroundEffectTable load_table_file(const std::filesystem::path& path);
GroundEffectTable load_table_string(const std::string& text);

/// Mean thrust ratio. Bilinear inside the grid; exactly 1 above the highest
/// row; clamped below the lowest height and above the largest angle; blended
/// linearly toward 1 between phi = 0 and the smallest tabulated angle.
double thrust_ratio(double z, double phi, const GroundEffectTable& table);

/// Relative standard deviation, interpolated like thrust_ratio (0 far field
/// and at phi = 0).
double ratio_sigma(double z, double phi, const GroundEffectTable& table);

/// thrust_ratio plus a zero-mean Gaussian perturbation of the interpolated
/// sigma, drawn from `rng`.
double sample_ratio(double z, double phi, const GroundEffectTable& table,
                    std::mt19937_64& rng);

}  // namespace morpho
