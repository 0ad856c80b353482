#pragma once

#include <string>
#include <utility>
#include <vector>

namespace hedgehog::plots {

// One curve; x and y must have equal length.  Colors come from a fixed
// palette by series index unless overridden.
struct Series {
    std::string name;
    std::vector<double> x, y;
    std::string color;
};

struct ChartOptions {
    int width = 640;
    int height = 420;
    std::string title, xlabel, ylabel;
    // points emphasised with a circle marker, e.g. known zeros
    std::vector<std::pair<double, double>> marks;
};

// Self-contained SVG document with axes, ticks, legend, and one polyline
// per series.
std::string svg_chart(const std::vector<Series>& series,
                      const ChartOptions& opts);

// Character-grid fallback for terminals; one glyph per series, legend and
// axis ranges appended below the frame.
std::string ascii_chart(const std::vector<Series>& series, int width = 72,
                        int height = 21);

// Verdict grid over a parameter sweep.
struct MapCell {
    double R = 0.0, t = 0.0;
    bool stable = false;
};

std::string svg_map(const std::vector<MapCell>& cells,
                    const ChartOptions& opts);
std::string ascii_map(const std::vector<MapCell>& cells);

}  // namespace hedgehog::plots
