#include "hitgnn/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hitgnn {

namespace {

constexpr int kWidth = 760;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 140;
constexpr int kMarginTop = 50;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

double max_value(const std::vector<SvgSeries>& series) {
    double hi = 0.0;
    for (const auto& s : series)
        for (double v : s.values) hi = std::max(hi, v);
    return hi > 0.0 ? hi : 1.0;
}

void write_header(std::ofstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
}

void write_axes(std::ofstream& out, double y_max) {
    const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
        << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double frac = static_cast<double>(tick) / 4.0;
        const double y = y0 - frac * (y0 - y1);
        out << "<text x=\"" << x0 - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(frac * y_max) << "</text>\n";
        out << "<line x1=\"" << x0 - 4 << "\" y1=\"" << y << "\" x2=\"" << x0 << "\" y2=\""
            << y << "\" stroke=\"black\"/>\n";
    }
}

void write_legend(std::ofstream& out, const std::vector<SvgSeries>& series) {
    const int lx = kWidth - kMarginRight + 12;
    int ly = kMarginTop + 8;
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << "<rect x=\"" << lx << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"12\" fill=\""
            << kPalette[i % 6] << "\"/>\n";
        out << "<text x=\"" << lx + 18 << "\" y=\"" << ly + 2
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[i].label
            << "</text>\n";
        ly += 20;
    }
}

}  // namespace

void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label,
                          const std::vector<SvgSeries>& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_line_chart_svg: cannot open " + path.string());
    write_header(out, title);
    const double y_max = max_value(series);
    write_axes(out, y_max);

    std::size_t n_points = 0;
    for (const auto& s : series) n_points = std::max(n_points, s.values.size());
    const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& vals = series[i].values;
        if (vals.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 6]
            << "\" stroke-width=\"2\" points=\"";
        for (std::size_t j = 0; j < vals.size(); ++j) {
            const double fx = n_points > 1
                                  ? static_cast<double>(j) / static_cast<double>(n_points - 1)
                                  : 0.0;
            const double x = x0 + fx * (x1 - x0);
            const double y = y0 - (vals[j] / y_max) * (y0 - y1);
            out << fmt(x) << "," << fmt(y) << " ";
        }
        out << "\"/>\n";
    }
    out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << x_label << "</text>\n";
    write_legend(out, series);
    out << "</svg>\n";
}

void write_bar_chart_svg(const std::filesystem::path& path, const std::string& title,
                         const std::vector<std::string>& group_labels,
                         const std::vector<SvgSeries>& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_bar_chart_svg: cannot open " + path.string());
    write_header(out, title);
    const double y_max = max_value(series);
    write_axes(out, y_max);

    const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    const std::size_t groups = group_labels.size();
    const std::size_t bars = std::max<std::size_t>(1, series.size());
    const double group_w = static_cast<double>(x1 - x0) / std::max<std::size_t>(1, groups);
    const double bar_w = group_w * 0.8 / static_cast<double>(bars);
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t s = 0; s < series.size(); ++s) {
            if (g >= series[s].values.size()) continue;
            const double v = series[s].values[g];
            const double h = (v / y_max) * (y0 - y1);
            const double x = x0 + group_w * (static_cast<double>(g) + 0.1) +
                             bar_w * static_cast<double>(s);
            out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y0 - h) << "\" width=\""
                << fmt(bar_w) << "\" height=\"" << fmt(h) << "\" fill=\"" << kPalette[s % 6]
                << "\"/>\n";
        }
        out << "<text x=\"" << fmt(x0 + group_w * (static_cast<double>(g) + 0.5)) << "\" y=\""
            << y0 + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            << "font-size=\"11\">" << group_labels[g] << "</text>\n";
    }
    write_legend(out, series);
    out << "</svg>\n";
}

}  // namespace hitgnn
