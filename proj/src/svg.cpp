#include "bsyk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace bsyk {

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgCurve>& curves) {
    const double w = 640, h = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& c : curves)
        for (size_t k = 0; k < c.x.size(); ++k) {
            xmin = std::min(xmin, c.x[k]);
            xmax = std::max(xmax, c.x[k]);
            ymin = std::min(ymin, c.y[k]);
            ymax = std::max(ymax, c.y[k]);
        }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    f << "<rect width='100%' height='100%' fill='white'/>\n";
    f << "<text x='" << w / 2 << "' y='22' text-anchor='middle' font-size='15'>" << title
      << "</text>\n";
    // axes
    f << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
      << "' stroke='black'/>\n";
    f << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
      << "' stroke='black'/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 5.0;
        const double yv = ymin + (ymax - ymin) * k / 5.0;
        std::ostringstream xs, ys;
        xs.precision(4);
        ys.precision(4);
        xs << xv;
        ys << yv;
        f << "<text x='" << px(xv) << "' y='" << h - mb + 18
          << "' text-anchor='middle' font-size='11'>" << xs.str() << "</text>\n";
        f << "<text x='" << ml - 8 << "' y='" << py(yv) + 4
          << "' text-anchor='end' font-size='11'>" << ys.str() << "</text>\n";
        f << "<line x1='" << px(xv) << "' y1='" << h - mb << "' x2='" << px(xv) << "' y2='"
          << h - mb + 4 << "' stroke='black'/>\n";
        f << "<line x1='" << ml - 4 << "' y1='" << py(yv) << "' x2='" << ml << "' y2='" << py(yv)
          << "' stroke='black'/>\n";
    }
    f << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 12
      << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n";
    f << "<text x='16' y='" << (mt + h - mb) / 2 << "' text-anchor='middle' font-size='13' "
      << "transform='rotate(-90 16 " << (mt + h - mb) / 2 << ")'>" << y_label << "</text>\n";
    int li = 0;
    for (const auto& c : curves) {
        f << "<polyline fill='none' stroke='" << c.color << "' stroke-width='1.5' points='";
        for (size_t k = 0; k < c.x.size(); ++k) {
            if (!std::isfinite(c.y[k])) continue;
            f << px(c.x[k]) << ',' << py(c.y[k]) << ' ';
        }
        f << "'/>\n";
        f << "<text x='" << w - mr - 6 << "' y='" << mt + 16 * (li + 1)
          << "' text-anchor='end' font-size='12' fill='" << c.color << "'>" << c.label
          << "</text>\n";
        ++li;
    }
    f << "</svg>\n";
}

}  // namespace bsyk
