#include "morpho/ground_effect.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "morpho/errors.hpp"

namespace morpho {

namespace {

constexpr char kHeader[] = "phi_deg,z_m,ratio,sigma";

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_number(const std::string& field, int line_no) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() ||
      !std::isfinite(value)) {
    throw ParseError(fmt::format("line {}: '{}' is not a number", line_no, t));
  }
  return value;
}

// Index of the cell below v and the fractional position toward the next one.
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double v) {
  if (axis.size() == 1 || v <= axis.front()) return {0, 0.0};
  if (v >= axis.back()) return {axis.size() - 2, 1.0};
  const auto it = std::upper_bound(axis.begin(), axis.end(), v);
  const std::size_t i = static_cast<std::size_t>(it - axis.begin()) - 1;
  return {i, (v - axis[i]) / (axis[i + 1] - axis[i])};
}

// Bilinear lookup with the angle and height clamped into the grid.
double grid_lookup(const Eigen::MatrixXd& grid, const GroundEffectTable& t,
                   double phi_deg, double z) {
  const auto [i, a] = locate(t.angles_deg, phi_deg);
  const auto [j, b] = locate(t.heights, z);
  if (t.angles_deg.size() == 1 && t.heights.size() == 1) return grid(0, 0);
  if (t.angles_deg.size() == 1) return (1 - b) * grid(0, j) + b * grid(0, j + 1);
  if (t.heights.size() == 1) return (1 - a) * grid(i, 0) + a * grid(i + 1, 0);
  return (1 - a) * ((1 - b) * grid(i, j) + b * grid(i, j + 1)) +
         a * ((1 - b) * grid(i + 1, j) + b * grid(i + 1, j + 1));
}

// Shared interpolation: `far` is the value above the table and at phi = 0.
double interpolate(const Eigen::MatrixXd& grid, const GroundEffectTable& t,
                   double z, double phi, double far) {
  if (z > t.heights.back()) return far;
  const double phi_deg = phi * 180.0 / std::numbers::pi;
  const double zc = std::max(z, t.heights.front());
  if (phi_deg < t.angles_deg.front()) {
    const double edge = grid_lookup(grid, t, t.angles_deg.front(), zc);
    const double w = std::max(phi_deg, 0.0) / t.angles_deg.front();
    return far + (edge - far) * w;
  }
  return grid_lookup(grid, t, phi_deg, zc);
}

}  // namespace

GroundEffectTable load_table(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::map<std::pair<double, double>, std::pair<double, double>> cells;

  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      std::string compact;
      std::remove_copy_if(line.begin(), line.end(), std::back_inserter(compact),
                          [](unsigned char c) { return std::isspace(c); });
      if (compact != kHeader) {
        throw ParseError(fmt::format("line {}: expected header '{}'", line_no, kHeader));
      }
      have_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) {
      throw ParseError(fmt::format("line {}: expected 4 fields, got {}", line_no,
                                   fields.size()));
    }
    const double phi = parse_number(fields[0], line_no);
    const double z = parse_number(fields[1], line_no);
    const double ratio = parse_number(fields[2], line_no);
    const double sigma = parse_number(fields[3], line_no);
    if (ratio <= 0.0) {
      throw NonPositiveRatio(fmt::format("line {}: ratio {}", line_no, ratio));
    }
    if (sigma < 0.0) {
      throw ParseError(fmt::format("line {}: negative sigma {}", line_no, sigma));
    }
    if (phi < 0.0 || phi > 90.0 || z < 0.0) {
      throw ParseError(fmt::format("line {}: angle or height out of range", line_no));
    }
    if (!cells.emplace(std::pair{phi, z}, std::pair{ratio, sigma}).second) {
      throw NonRectangularGrid(
          fmt::format("line {}: duplicate cell ({}, {})", line_no, phi, z));
    }
  }
  if (!have_header) throw ParseError("missing header");
  if (cells.empty()) throw ParseError("no data rows");

  GroundEffectTable t;
  for (const auto& [key, value] : cells) {
    t.angles_deg.push_back(key.first);
    t.heights.push_back(key.second);
  }
  for (auto* axis : {&t.angles_deg, &t.heights}) {
    std::sort(axis->begin(), axis->end());
    axis->erase(std::unique(axis->begin(), axis->end()), axis->end());
  }
  if (cells.size() != t.angles_deg.size() * t.heights.size()) {
    throw NonRectangularGrid(fmt::format("{} cells for a {} x {} grid", cells.size(),
                                         t.angles_deg.size(), t.heights.size()));
  }
  const auto rows = static_cast<Eigen::Index>(t.angles_deg.size());
  const auto cols = static_cast<Eigen::Index>(t.heights.size());
  t.ratio.resize(rows, cols);
  t.sigma.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& [ratio, sigma] = cells.at({t.angles_deg[i], t.heights[j]});
      t.ratio(i, j) = ratio;
      t.sigma(i, j) = sigma;
    }
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (std::abs(t.ratio(i, cols - 1) - 1.0) > 0.02) {
      throw ParseError(fmt::format(
          "ratio at the highest row must be within 2% of 1 (phi = {} deg)",
          t.angles_deg[i]));
    }
  }
  return t;
}

GroundEffectTable load_table_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ground-effect table " + path.string());
  return load_table(in);
}

GroundEffectTable load_table_string(const std::string& text) {
  std::istringstream in(text);
  return load_table(in);
}

double thrust_ratio(double z, double phi, const GroundEffectTable& t) {
  return interpolate(t.ratio, t, z, phi, 1.0);
}

double ratio_sigma(double z, double phi, const GroundEffectTable& t) {
  return interpolate(t.sigma, t, z, phi, 0.0);
}

double sample_ratio(double z, double phi, const GroundEffectTable& t,
                    std::mt19937_64& rng) {
  const double mean = thrust_ratio(z, phi, t);
  const double sd = ratio_sigma(z, phi, t);
  std::normal_distribution<double> normal(0.0, 1.0);
  return std::max(0.0, mean + sd * normal(rng));
}

}  // namespace morpho
