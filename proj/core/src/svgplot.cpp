#include "ule/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ule/error.hpp"

namespace ule {

namespace {

constexpr int WIDTH = 720;
constexpr int HEIGHT = 480;
constexpr int MARGIN_LEFT = 70;
constexpr int MARGIN_RIGHT = 160;
constexpr int MARGIN_TOP = 40;
constexpr int MARGIN_BOTTOM = 55;

const char* PALETTE[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                         "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

void write_svg_line_chart(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series) {
    if (series.empty()) throw InputError("svg chart needs at least one series");
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (x_min > x_max) throw InputError("svg chart has no points");
    if (x_min == x_max) {
        x_min -= 1.0;
        x_max += 1.0;
    }
    const double y_pad = (y_max - y_min) * 0.08 + 1e-9;
    y_min -= y_pad;
    y_max += y_pad;

    const double plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    const double plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    auto sx = [&](double x) { return MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double y) {
        return MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
    };

    std::ofstream out(path);
    if (!out) throw InputError("cannot write svg: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << WIDTH << "\" height=\""
        << HEIGHT << "\" viewBox=\"0 0 " << WIDTH << ' ' << HEIGHT << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << WIDTH / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\" "
           "font-family=\"sans-serif\">"
        << title << "</text>\n";

    // Axes and ticks.
    out << "<line x1=\"" << MARGIN_LEFT << "\" y1=\"" << MARGIN_TOP << "\" x2=\"" << MARGIN_LEFT
        << "\" y2=\"" << MARGIN_TOP + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << MARGIN_LEFT << "\" y1=\"" << MARGIN_TOP + plot_h << "\" x2=\""
        << MARGIN_LEFT + plot_w << "\" y2=\"" << MARGIN_TOP + plot_h << "\" stroke=\"black\"/>\n";
    constexpr int TICKS = 5;
    for (int t = 0; t <= TICKS; ++t) {
        const double fx = x_min + (x_max - x_min) * t / TICKS;
        const double fy = y_min + (y_max - y_min) * t / TICKS;
        out << "<line x1=\"" << sx(fx) << "\" y1=\"" << MARGIN_TOP + plot_h << "\" x2=\"" << sx(fx)
            << "\" y2=\"" << MARGIN_TOP + plot_h + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << sx(fx) << "\" y=\"" << MARGIN_TOP + plot_h + 20
            << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(fx)
            << "</text>\n";
        out << "<line x1=\"" << MARGIN_LEFT - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << MARGIN_LEFT
            << "\" y2=\"" << sy(fy) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << MARGIN_LEFT - 9 << "\" y=\"" << sy(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(fy)
            << "</text>\n";
    }
    out << "<text x=\"" << MARGIN_LEFT + plot_w / 2 << "\" y=\"" << HEIGHT - 12
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << x_label
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << MARGIN_TOP + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 18 "
        << MARGIN_TOP + plot_h / 2 << ")\">" << y_label << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = PALETTE[s % (sizeof PALETTE / sizeof PALETTE[0])];
        auto pts = series[s].points;
        std::sort(pts.begin(), pts.end());
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : pts) out << sx(x) << ',' << sy(y) << ' ';
        out << "\"/>\n";
        for (const auto& [x, y] : pts)
            out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"" << color
                << "\"/>\n";
        const double ly = MARGIN_TOP + 16.0 * static_cast<double>(s);
        out << "<line x1=\"" << MARGIN_LEFT + plot_w + 12 << "\" y1=\"" << ly + 8 << "\" x2=\""
            << MARGIN_LEFT + plot_w + 34 << "\" y2=\"" << ly + 8 << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << MARGIN_LEFT + plot_w + 40 << "\" y=\"" << ly + 12
            << "\" font-size=\"12\" font-family=\"sans-serif\">" << series[s].name << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace ule
