#pragma once

#include <string>
#include <utility>
#include <vector>

namespace bgs {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  ///< (x, y); non-positive or non-finite values are not drawn
};

struct PlotData {
  std::string title;
  std::string xlabel = "kappa";
  std::string ylabel;
  std::vector<Series> series;
  /// Dashed eps, eps*kappa and eps*kappa^2 guides.
  bool reference_lines = true;
};

/// Log-log scatter plot. Each drawn point is one <circle class="marker">,
/// each series one <text class="legend">. Throws ContractError without series.
std::string emit_svg(const PlotData& plot);

struct HeatGrid {
  std::string title;
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<double>> values;  ///< rows x cols; non-finite cells are drawn grey
};

/// Grid of cells colored by log10 of the value, with the value printed in each cell.
std::string emit_heat_svg(const HeatGrid& grid);

}  // namespace bgs
