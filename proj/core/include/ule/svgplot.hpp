#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ule {

struct PlotSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

// Static SVG line chart: one polyline per series, linear axes, legend.
void write_svg_line_chart(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series);

}  // namespace ule
