// svg.hpp — minimal standalone line-plot renderer. Plots are a convenience
// output only; nothing downstream depends on them.

#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace crowsim {

struct PlotSeries {
    std::string name;
    std::vector<double> y;
};

inline void svg_line_plot(const std::string& path, const std::string& title,
                          const std::vector<double>& x, const std::vector<PlotSeries>& series) {
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    const double width = 640, height = 420;
    const double ml = 60, mr = 20, mt = 40, mb = 40;

    double xmin = std::numeric_limits<double>::max(), xmax = std::numeric_limits<double>::lowest();
    double ymin = xmin, ymax = xmax;
    for (double v : x) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
    }
    for (const PlotSeries& s : series)
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double v) { return height - mb - (v - ymin) / (ymax - ymin) * (height - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    svg << "<rect x='" << ml << "' y='" << mt << "' width='" << width - ml - mr << "' height='"
        << height - mt - mb << "' fill='none' stroke='black'/>\n";

    int ci = 0;
    for (const PlotSeries& s : series) {
        const char* color = kColors[ci % 6];
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < x.size() && i < s.y.size(); ++i)
            svg << px(x[i]) << ',' << py(s.y[i]) << ' ';
        svg << "'/>\n";
        svg << "<text x='" << width - mr - 150 << "' y='" << mt + 18 + 16 * ci
            << "' font-size='12' fill='" << color << "'>" << s.name << "</text>\n";
        ++ci;
    }
    svg << "<text x='" << ml - 8 << "' y='" << py(ymin) << "' text-anchor='end' font-size='11'>"
        << ymin << "</text>\n";
    svg << "<text x='" << ml - 8 << "' y='" << py(ymax) + 4
        << "' text-anchor='end' font-size='11'>" << ymax << "</text>\n";
    svg << "<text x='" << px(xmin) << "' y='" << height - mb + 16
        << "' text-anchor='middle' font-size='11'>" << xmin << "</text>\n";
    svg << "<text x='" << px(xmax) << "' y='" << height - mb + 16
        << "' text-anchor='middle' font-size='11'>" << xmax << "</text>\n";
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    out << svg.str();
}

}  // namespace crowsim
