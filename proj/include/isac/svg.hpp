// SPDX-License-Identifier: Apache-2.0
//
// Minimal line-chart renderer for sweep CSVs. Output is a function of the
// input bytes only (fixed-precision coordinates, no timestamps).

#ifndef ISAC_SVG_HPP
#define ISAC_SVG_HPP

#include "isac/csv.hpp"
#include "isac/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

namespace detail {

inline std::string fixed(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

inline std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v)
    {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle()
    {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        } else if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
            const double pad = std::max(0.5, 0.05 * std::abs(hi));
            lo -= pad;
            hi += pad;
        }
    }
};

} // namespace detail

/// Renders `table` as one polyline per y column against `x_column`.
/// Rows where x or y is not finite are skipped.
inline std::string render_svg(const CsvTable& table, const std::string& x_column,
                              const std::vector<std::string>& y_columns)
{
    using detail::fixed;
    if (y_columns.empty())
        throw std::invalid_argument("render_svg: no y columns given");
    const std::size_t xi = table.column(x_column);
    std::vector<std::size_t> yi;
    for (const auto& name : y_columns)
        yi.push_back(table.column(name));

    std::vector<std::vector<std::array<double, 2>>> series(yi.size());
    detail::Range xr, yr;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const double x = table.number(r, xi);
        if (!std::isfinite(x))
            continue;
        for (std::size_t s = 0; s < yi.size(); ++s) {
            const double y = table.number(r, yi[s]);
            if (!std::isfinite(y))
                continue;
            series[s].push_back({x, y});
            xr.add(x);
            yr.add(y);
        }
    }
    xr.settle();
    yr.settle();

    constexpr double width = 640, height = 420;
    constexpr double left = 70, right = 150, top = 20, bottom = 50;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto py = [&](double y) { return top + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };

    static const std::array<const char*, 8> palette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                        "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(plot_w)
        << "\" height=\"" << fixed(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";

    constexpr int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double xv = xr.lo + (xr.hi - xr.lo) * i / ticks;
        const double yv = yr.lo + (yr.hi - yr.lo) * i / ticks;
        svg << "<line x1=\"" << fixed(px(xv)) << "\" y1=\"" << fixed(top + plot_h) << "\" x2=\"" << fixed(px(xv))
            << "\" y2=\"" << fixed(top + plot_h + 5) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << fixed(top + plot_h + 18)
            << "\" text-anchor=\"middle\">" << detail::tick_label(xv) << "</text>\n";
        svg << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(py(yv)) << "\" x2=\"" << fixed(left)
            << "\" y2=\"" << fixed(py(yv)) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(py(yv) + 4) << "\" text-anchor=\"end\">"
            << detail::tick_label(yv) << "</text>\n";
    }
    svg << "<text x=\"" << fixed(left + plot_w / 2) << "\" y=\"" << fixed(height - 10)
        << "\" text-anchor=\"middle\">" << detail::xml_escape(x_column) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* colour = palette[s % palette.size()];
        const auto& pts = series[s];
        if (pts.size() >= 2) {
            svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i)
                svg << (i ? " " : "") << fixed(px(pts[i][0])) << ',' << fixed(py(pts[i][1]));
            svg << "\"/>\n";
        }
        for (const auto& pt : pts)
            svg << "<circle cx=\"" << fixed(px(pt[0])) << "\" cy=\"" << fixed(py(pt[1])) << "\" r=\"2.5\" fill=\""
                << colour << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(s);
        svg << "<line x1=\"" << fixed(width - right + 12) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\""
            << fixed(width - right + 36) << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << colour
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fixed(width - right + 42) << "\" y=\"" << fixed(ly) << "\">"
            << detail::xml_escape(y_columns[s]) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

inline void render_svg(const std::string& csv_path, const std::string& x_column,
                       const std::vector<std::string>& y_columns, const std::string& out_path)
{
    const CsvTable table = read_csv(csv_path);
    const std::string doc = render_svg(table, x_column, y_columns);
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        throw IoError(out_path, "cannot open for writing");
    out << doc;
    out.flush();
    if (!out)
        throw IoError(out_path, "write failed");
}

} // namespace isac

#endif // ISAC_SVG_HPP
