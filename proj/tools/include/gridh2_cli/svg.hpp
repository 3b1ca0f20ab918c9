#pragma once

#include <string>
#include <vector>

namespace gridh2::cli {

struct Series {
  std::string label;
  std::string color;  // any SVG color, e.g. "#1f77b4"
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 720;
  int height = 420;
};

/// Self-contained SVG document (no external fonts, scripts or images).
std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series);

std::string xml_escape(const std::string& text);

}  // namespace gridh2::cli
