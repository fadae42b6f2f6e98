#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hitgnn {

struct SvgSeries {
    std::string label;
    std::vector<double> values;  // x is the index
};

// Minimal SVG line chart, one polyline per series with a legend.
void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label,
                          const std::vector<SvgSeries>& series);

// Minimal SVG grouped bar chart: one group per label, one bar per series.
void write_bar_chart_svg(const std::filesystem::path& path, const std::string& title,
                         const std::vector<std::string>& group_labels,
                         const std::vector<SvgSeries>& series);

}  // namespace hitgnn
