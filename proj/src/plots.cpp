#include "hedgehog/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hedgehog::plots {

namespace {

const char* kPalette[] = {"#1f6fb4", "#d1495b", "#2e8b57", "#8860b2"};
constexpr int kPaletteSize = 4;

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // widen degenerate or empty ranges so the mapping below is finite
    void regularize() {
        if (lo > hi) {
            lo = 0.0;
            hi = 1.0;
        } else if (lo == hi) {
            lo -= 1.0;
            hi += 1.0;
        }
    }
    double span() const { return hi - lo; }
};

// largest 1/2/5 x 10^k step that yields at least `target` intervals
double nice_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void check_series(const std::vector<Series>& series) {
    for (const Series& s : series)
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("plot series " + s.name +
                                        ": x and y lengths differ");
}

}  // namespace

std::string svg_chart(const std::vector<Series>& series,
                      const ChartOptions& opts) {
    check_series(series);

    Range rx, ry;
    for (const Series& s : series) {
        for (double v : s.x) rx.include(v);
        for (double v : s.y) ry.include(v);
    }
    for (const auto& [mx, my] : opts.marks) {
        rx.include(mx);
        ry.include(my);
    }
    rx.regularize();
    ry.regularize();
    ry.lo -= 0.05 * ry.span();
    ry.hi += 0.05 * ry.span();

    const double ml = 62, mr = 18, mt = opts.title.empty() ? 18 : 34, mb = 46;
    const double pw = opts.width - ml - mr, ph = opts.height - mt - mb;
    const auto X = [&](double v) { return ml + (v - rx.lo) / rx.span() * pw; };
    const auto Y = [&](double v) {
        return mt + ph - (v - ry.lo) / ry.span() * ph;
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
        << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width
        << " " << opts.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opts.title.empty())
        out << "<text x=\"" << opts.width / 2.0
            << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"14\">"
            << opts.title << "</text>\n";

    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    const double xstep = nice_step(rx.span(), 5);
    for (double v = std::ceil(rx.lo / xstep) * xstep; v <= rx.hi + 1e-12 * xstep;
         v += xstep) {
        const double px = X(v);
        out << "<line x1=\"" << px << "\" y1=\"" << mt << "\" x2=\"" << px
            << "\" y2=\"" << mt + ph << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << mt + ph + 16
            << "\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
    }
    const double ystep = nice_step(ry.span(), 5);
    for (double v = std::ceil(ry.lo / ystep) * ystep; v <= ry.hi + 1e-12 * ystep;
         v += ystep) {
        const double py = Y(v);
        out << "<line x1=\"" << ml << "\" y1=\"" << py << "\" x2=\"" << ml + pw
            << "\" y2=\"" << py << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << ml - 6 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
    }
    out << "</g>\n";

    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
        << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
    if (!opts.xlabel.empty())
        out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opts.height - 8
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"12\">"
            << opts.xlabel << "</text>\n";
    if (!opts.ylabel.empty())
        out << "<text x=\"14\" y=\"" << mt + ph / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"12\" transform=\"rotate(-90 14 "
            << mt + ph / 2 << ")\">" << opts.ylabel << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const std::string color =
            s.color.empty() ? kPalette[si % kPaletteSize] : s.color;
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i) out << ' ';
            out << fmt(X(s.x[i])) << ',' << fmt(Y(s.y[i]));
        }
        out << "\"/>\n";
        out << "<g font-family=\"sans-serif\" font-size=\"11\">"
            << "<line x1=\"" << ml + pw - 130 << "\" y1=\""
            << mt + 14 + 16 * static_cast<double>(si) << "\" x2=\""
            << ml + pw - 108 << "\" y2=\""
            << mt + 14 + 16 * static_cast<double>(si) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>"
            << "<text x=\"" << ml + pw - 102 << "\" y=\""
            << mt + 18 + 16 * static_cast<double>(si) << "\">" << s.name
            << "</text></g>\n";
    }

    for (const auto& [mx, my] : opts.marks)
        out << "<circle cx=\"" << fmt(X(mx)) << "\" cy=\"" << fmt(Y(my))
            << "\" r=\"4\" fill=\"none\" stroke=\"#111\" "
               "stroke-width=\"1.5\"/>\n";

    out << "</svg>\n";
    return out.str();
}

std::string ascii_chart(const std::vector<Series>& series, int width,
                        int height) {
    check_series(series);
    if (width < 16 || height < 5)
        throw std::invalid_argument("ascii_chart: frame too small");

    Range rx, ry;
    for (const Series& s : series) {
        for (double v : s.x) rx.include(v);
        for (double v : s.y) ry.include(v);
    }
    rx.regularize();
    ry.regularize();

    const char glyphs[] = {'*', '+', 'o', 'x'};
    std::vector<std::string> grid(static_cast<std::size_t>(height),
                                  std::string(static_cast<std::size_t>(width),
                                              ' '));
    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const char g = glyphs[si % sizeof(glyphs)];
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const int cx = static_cast<int>(
                std::lround((s.x[i] - rx.lo) / rx.span() * (width - 1)));
            const int cy = static_cast<int>(
                std::lround((s.y[i] - ry.lo) / ry.span() * (height - 1)));
            if (cx < 0 || cx >= width || cy < 0 || cy >= height) continue;
            grid[static_cast<std::size_t>(height - 1 - cy)]
                [static_cast<std::size_t>(cx)] = g;
        }
    }

    std::ostringstream out;
    char label[32];
    for (int row = 0; row < height; ++row) {
        const double yv =
            ry.hi - ry.span() * static_cast<double>(row) / (height - 1);
        std::snprintf(label, sizeof(label), "%10.4g |", yv);
        out << label << grid[static_cast<std::size_t>(row)] << '\n';
    }
    out << std::string(11, ' ') << '+' << std::string(
        static_cast<std::size_t>(width), '-') << '\n';
    char lo[32], hi[32];
    std::snprintf(lo, sizeof(lo), "%.4g", rx.lo);
    std::snprintf(hi, sizeof(hi), "%.4g", rx.hi);
    const int pad = width - static_cast<int>(std::string(lo).size()) -
                    static_cast<int>(std::string(hi).size());
    out << std::string(12, ' ') << lo
        << std::string(static_cast<std::size_t>(std::max(1, pad)), ' ') << hi
        << '\n';
    for (std::size_t si = 0; si < series.size(); ++si)
        out << "  " << glyphs[si % sizeof(glyphs)] << " " << series[si].name
            << '\n';
    return out.str();
}

std::string svg_map(const std::vector<MapCell>& cells,
                    const ChartOptions& opts) {
    if (cells.empty()) throw std::invalid_argument("svg_map: no cells");
    std::set<double> rset, tset;
    for (const MapCell& c : cells) {
        rset.insert(c.R);
        tset.insert(c.t);
    }
    const std::vector<double> rv(rset.begin(), rset.end());
    const std::vector<double> tv(tset.begin(), tset.end());
    const auto index_of = [](const std::vector<double>& v, double x) {
        return static_cast<std::size_t>(
            std::lower_bound(v.begin(), v.end(), x) - v.begin());
    };

    const double ml = 62, mr = 18, mt = opts.title.empty() ? 18 : 34, mb = 46;
    const double pw = opts.width - ml - mr, ph = opts.height - mt - mb;
    const double cw = pw / static_cast<double>(rv.size());
    const double ch = ph / static_cast<double>(tv.size());

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
        << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width
        << " " << opts.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opts.title.empty())
        out << "<text x=\"" << opts.width / 2.0
            << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"14\">"
            << opts.title << "</text>\n";

    for (const MapCell& c : cells) {
        const double x = ml + cw * static_cast<double>(index_of(rv, c.R));
        // t increases upward
        const double y =
            mt + ph - ch * static_cast<double>(index_of(tv, c.t) + 1);
        out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
            << fmt(cw) << "\" height=\"" << fmt(ch) << "\" fill=\""
            << (c.stable ? "#2e8b57" : "#c0392b")
            << "\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
    }

    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    const std::size_t rskip = std::max<std::size_t>(1, rv.size() / 8);
    for (std::size_t i = 0; i < rv.size(); i += rskip)
        out << "<text x=\"" << fmt(ml + cw * (static_cast<double>(i) + 0.5))
            << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">"
            << fmt(rv[i]) << "</text>\n";
    const std::size_t tskip = std::max<std::size_t>(1, tv.size() / 8);
    for (std::size_t i = 0; i < tv.size(); i += tskip)
        out << "<text x=\"" << ml - 6 << "\" y=\""
            << fmt(mt + ph - ch * (static_cast<double>(i) + 0.5) + 4)
            << "\" text-anchor=\"end\">" << fmt(tv[i]) << "</text>\n";
    out << "</g>\n";

    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
        << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opts.height - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << (opts.xlabel.empty() ? "R" : opts.xlabel) << "</text>\n";
    out << "<text x=\"14\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\" transform=\"rotate(-90 14 "
        << mt + ph / 2 << ")\">" << (opts.ylabel.empty() ? "t" : opts.ylabel)
        << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string ascii_map(const std::vector<MapCell>& cells) {
    if (cells.empty()) throw std::invalid_argument("ascii_map: no cells");
    std::set<double> rset, tset;
    for (const MapCell& c : cells) {
        rset.insert(c.R);
        tset.insert(c.t);
    }
    const std::vector<double> rv(rset.begin(), rset.end());
    const std::vector<double> tv(tset.begin(), tset.end());
    const auto index_of = [](const std::vector<double>& v, double x) {
        return static_cast<std::size_t>(
            std::lower_bound(v.begin(), v.end(), x) - v.begin());
    };

    std::vector<std::string> grid(tv.size(), std::string(rv.size(), ' '));
    for (const MapCell& c : cells)
        grid[index_of(tv, c.t)][index_of(rv, c.R)] = c.stable ? '#' : '.';

    std::ostringstream out;
    char label[32];
    for (std::size_t row = tv.size(); row-- > 0;) {
        std::snprintf(label, sizeof(label), "t=%-8.4g |", tv[row]);
        out << label << grid[row] << '\n';
    }
    std::snprintf(label, sizeof(label), "R: %.4g .. %.4g", rv.front(),
                  rv.back());
    out << std::string(12, ' ') << label << "   (# stable, . unstable)\n";
    return out.str();
}

}  // namespace hedgehog::plots
