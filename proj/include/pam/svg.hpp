// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal static SVG line/point charts for decay fits and sweep curves.
#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace pam::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// Optional symmetric error bars.
    std::vector<double> err;
    std::string color = "#1f77b4";
    bool points = true;
    bool line = true;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
};

namespace detail {

inline std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

}  // namespace detail

inline std::string render(const Chart& c, int width = 640, int height = 420)
{
    const double ml = 70, mr = 20, mt = 36, mb = 50;
    auto tx = [&](double v) { return c.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return c.log_y ? std::log10(v) : v; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : c.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((c.log_x && s.x[i] <= 0) || (c.log_y && s.y[i] <= 0) || !std::isfinite(s.y[i])) continue;
            const double e = s.err.empty() ? 0.0 : s.err[i];
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            const double lo = c.log_y ? ty(std::max(s.y[i] - e, s.y[i] * 0.5)) : s.y[i] - e;
            y0 = std::min(y0, lo);
            y1 = std::max(y1, ty(s.y[i] + e));
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return mt + (1.0 - (ty(v) - y0) / (y1 - y0)) * ph; };
    auto py_raw = [&](double u) { return mt + (1.0 - (u - y0) / (y1 - y0)) * ph; };

    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << detail::escape(c.title)
       << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double u = x0 + (x1 - x0) * k / 4.0;
        const double X = ml + pw * k / 4.0;
        os << "<text x=\"" << X << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">"
           << detail::fmt(c.log_x ? std::pow(10.0, u) : u) << "</text>\n";
        const double v = y0 + (y1 - y0) * k / 4.0;
        os << "<text x=\"" << ml - 6 << "\" y=\"" << py_raw(v) + 4 << "\" text-anchor=\"end\">"
           << detail::fmt(c.log_y ? std::pow(10.0, v) : v) << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
       << detail::escape(c.x_label) << "</text>\n";
    os << "<text transform=\"translate(16," << mt + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << detail::escape(c.y_label) << "</text>\n";
    int legend = 0;
    for (const auto& s : c.series) {
        std::ostringstream path;
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((c.log_x && s.x[i] <= 0) || (c.log_y && s.y[i] <= 0) || !std::isfinite(s.y[i])) continue;
            path << (first ? "M" : " L") << px(s.x[i]) << ' ' << py(s.y[i]);
            first = false;
            if (!s.err.empty() && s.err[i] > 0) {
                const double lo = c.log_y ? std::max(s.y[i] - s.err[i], s.y[i] * 0.5) : s.y[i] - s.err[i];
                os << "<line x1=\"" << px(s.x[i]) << "\" x2=\"" << px(s.x[i]) << "\" y1=\"" << py(lo) << "\" y2=\""
                   << py(s.y[i] + s.err[i]) << "\" stroke=\"" << s.color << "\"/>\n";
            }
            if (s.points)
                os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2.5\" fill=\"" << s.color
                   << "\"/>\n";
        }
        if (s.line && !first)
            os << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << s.color << "\"/>\n";
        const double ly = mt + 14 + 16 * legend++;
        os << "<rect x=\"" << ml + pw - 150 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << s.color
           << "\"/><text x=\"" << ml + pw - 134 << "\" y=\"" << ly << "\">" << detail::escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace pam::svg
