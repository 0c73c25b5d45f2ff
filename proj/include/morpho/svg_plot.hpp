#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "morpho/sim_log.hpp"

namespace morpho {

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Standalone SVG line chart with axes and tick labels.
std::string render_svg(const LinePlot& plot);

/// z.svg, phi.svg, alpha.svg and ubar.svg derived from a log CSV.
/// Returns the written paths.
std::vector<std::filesystem::path> write_channel_plots(const CsvTable& csv,
                                                       const std::filesystem::path& dir);

}  // namespace morpho
