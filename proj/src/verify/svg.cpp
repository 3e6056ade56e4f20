// SPDX-License-Identifier: Apache-2.0
#include "verify/svg.hpp"

#include "common/format.hpp"

#include <algorithm>
#include <cmath>

namespace fbsde {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 40.0;

std::string num(double v) {
    // Two decimals.
    const double r = std::round(v * 100.0) / 100.0;
    return format_double(r == 0.0 ? 0.0 : r);
}

std::string escape(const std::string& s) {
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

struct Frame {
    double x0, x1, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - y / y1 * (kHeight - kTop - kBottom); }
};

template <class F>
std::string polyline(const EnvelopeVerdict& v, const Frame& fr, F&& y, const char* style) {
    std::string s = "<polyline fill=\"none\" " + std::string(style) + " points=\"";
    for (std::size_t i = 0; i < v.points.size(); ++i) {
        if (i) s += ' ';
        s += num(fr.px(v.points[i].x)) + "," + num(fr.py(std::min(y(v.points[i]), fr.y1)));
    }
    return s + "\"/>\n";
}

}  // namespace

std::string overlay_svg(const EnvelopeVerdict& v, const std::string& title) {
    Frame fr{v.points.front().x, v.points.back().x, 0.0};
    for (const auto& p : v.points) fr.y1 = std::max({fr.y1, p.kde + v.z * p.stderr_, p.upper});
    fr.y1 = fr.y1 > 0.0 ? 1.05 * fr.y1 : 1.0;

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                    num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"18\" text-anchor=\"middle\">" + escape(title) + "</text>\n";

    // Axes with five ticks each.
    const double ax = kHeight - kBottom;
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(ax) + "\" x2=\"" + num(kWidth - kRight) + "\" y2=\"" + num(ax) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(ax) +
         "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = fr.x0 + (fr.x1 - fr.x0) * i / 4.0;
        const double yv = fr.y1 * i / 4.0;
        s += "<text x=\"" + num(fr.px(xv)) + "\" y=\"" + num(ax + 16) + "\" text-anchor=\"middle\">" + num(xv) +
             "</text>\n";
        s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(fr.py(yv) + 4) + "\" text-anchor=\"end\">" +
             format_double(std::round(yv * 1000.0) / 1000.0) + "</text>\n";
    }

    // Shaded band kde +- z stderr.
    s += "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < v.points.size(); ++i) {
        const auto& p = v.points[i];
        s += (i ? " " : "") + num(fr.px(p.x)) + "," + num(fr.py(std::min(p.kde + v.z * p.stderr_, fr.y1)));
    }
    for (std::size_t i = v.points.size(); i-- > 0;) {
        const auto& p = v.points[i];
        s += " " + num(fr.px(p.x)) + "," + num(fr.py(std::max(p.kde - v.z * p.stderr_, 0.0)));
    }
    s += "\"/>\n";

    s += polyline(v, fr, [](const EnvelopePoint& p) { return p.lower; }, "stroke=\"#d62728\" stroke-dasharray=\"6 3\"");
    s += polyline(v, fr, [](const EnvelopePoint& p) { return p.upper; }, "stroke=\"#d62728\"");
    s += polyline(v, fr, [](const EnvelopePoint& p) { return p.kde; }, "stroke=\"#08519c\" stroke-width=\"2\"");
    for (const auto& p : v.points) {
        if (!p.pass) s += "<circle cx=\"" + num(fr.px(p.x)) + "\" cy=\"" + num(fr.py(std::min(p.kde, fr.y1))) +
                          "\" r=\"2.5\" fill=\"black\"/>\n";
    }
    s += "<text x=\"" + num(kWidth - kRight) + "\" y=\"" + num(kTop + 12) +
         "\" text-anchor=\"end\">KDE (blue), envelope (red), violations (dots)</text>\n";
    return s + "</svg>\n";
}

std::string overlay_csv(const EnvelopeVerdict& v) {
    CsvWriter csv({"x", "kde", "stderr", "lower", "upper", "pass"});
    for (const auto& p : v.points) {
        csv.cell(p.x).cell(p.kde).cell(p.stderr_).cell(p.lower).cell(p.upper).cell(static_cast<long long>(p.pass));
        csv.end_row();
    }
    return csv.str();
}

}  // namespace fbsde
