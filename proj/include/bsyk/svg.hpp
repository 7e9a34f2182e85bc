#pragma once

#include <string>
#include <vector>

namespace bsyk {

// Minimal line-plot writer; CSV remains the source of truth, the SVG is a
// convenience view.
struct SvgCurve {
    std::string label;
    std::string color = "#1f6fb2";
    std::vector<double> x, y;
};

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgCurve>& curves);

}  // namespace bsyk
