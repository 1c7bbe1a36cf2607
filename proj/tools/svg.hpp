#pragma once

#include <string>
#include <vector>

namespace elmo::cli::svg {

struct Series {
  std::string name;
  std::vector<double> x, y;
  bool dashed = false;
};

struct Panel {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<Series> series;
};

/// Static SVG 1.1 line plot, panels stacked vertically. Points that are not
/// finite (or not positive on a log axis) are skipped.
std::string render(const std::vector<Panel>& panels, double width = 820, double panel_height = 320);

}  // namespace elmo::cli::svg
