// Copyright 2026 The hvqa Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Minimal static SVG line plots: axes with ticks, optional log scales,
 * legend, line and marker series.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"

namespace hvqa::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;
    bool dashed = false;
};

struct Plot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool logx = false;
    bool logy = false;
    std::vector<Series> series;
    int width = 640;
    int height = 420;
};

namespace detail {

inline const char *color(std::size_t i) {
    static const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};
    return palette[i % 8];
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline std::string escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '&':
            out += "&amp;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    [[nodiscard]] double map(double v) const {
        const double t = log ? std::log10(v) : v;
        return (t - lo) / (hi - lo);
    }
};

inline Axis make_axis(const std::vector<Series> &series, bool use_x, bool log) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto &s : series) {
        for (double v : use_x ? s.x : s.y) {
            if (!std::isfinite(v) || (log && v <= 0.0)) {
                continue;
            }
            const double t = log ? std::log10(v) : v;
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    } else if (!log) {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    } else {
        lo = std::floor(lo);
        hi = std::ceil(hi);
    }
    return {lo, hi, log};
}

inline std::vector<double> ticks(const Axis &a) {
    std::vector<double> out;
    if (a.log) {
        const int step = std::max(1, static_cast<int>((a.hi - a.lo) / 6));
        for (int e = static_cast<int>(a.lo); e <= static_cast<int>(a.hi); e += step) {
            out.push_back(std::pow(10.0, e));
        }
        return out;
    }
    const double raw = (a.hi - a.lo) / 5;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    }
    for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-12; v += step) {
        out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    }
    return out;
}

} // namespace detail

inline std::string render(const Plot &plot) {
    const double left = 70, right = 20, top = 40, bottom = 55;
    const double w = plot.width - left - right;
    const double h = plot.height - top - bottom;
    const auto ax = detail::make_axis(plot.series, true, plot.logx);
    const auto ay = detail::make_axis(plot.series, false, plot.logy);
    auto px = [&](double v) { return left + w * ax.map(v); };
    auto py = [&](double v) { return top + h * (1.0 - ay.map(v)); };
    using detail::num;

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(plot.width) +
         "\" height=\"" + std::to_string(plot.height) + "\" font-family=\"sans-serif\" " +
         "font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(plot.width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" " +
         "font-size=\"14\">" + detail::escape(plot.title) + "</text>\n";
    s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double t : detail::ticks(ax)) {
        const double x = px(t);
        if (x < left - 1e-9 || x > left + w + 1e-9) {
            continue;
        }
        s += "<line x1=\"" + num(x) + "\" y1=\"" + num(top + h) + "\" x2=\"" + num(x) +
             "\" y2=\"" + num(top + h + 5) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(x) + "\" y=\"" + num(top + h + 18) +
             "\" text-anchor=\"middle\">" + detail::tick_label(t) + "</text>\n";
    }
    for (double t : detail::ticks(ay)) {
        const double y = py(t);
        if (y < top - 1e-9 || y > top + h + 1e-9) {
            continue;
        }
        s += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left) +
             "\" y2=\"" + num(y) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4) +
             "\" text-anchor=\"end\">" + detail::tick_label(t) + "</text>\n";
    }
    s += "<text x=\"" + num(left + w / 2) + "\" y=\"" + num(plot.height - 12.0) +
         "\" text-anchor=\"middle\">" + detail::escape(plot.xlabel) + "</text>\n";
    s += "<text transform=\"translate(16," + num(top + h / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + detail::escape(plot.ylabel) +
         "</text>\n";

    for (std::size_t i = 0; i < plot.series.size(); ++i) {
        const auto &ser = plot.series[i];
        const std::string col = detail::color(i);
        std::string pts;
        for (std::size_t j = 0; j < std::min(ser.x.size(), ser.y.size()); ++j) {
            if ((plot.logx && ser.x[j] <= 0) || (plot.logy && ser.y[j] <= 0) ||
                !std::isfinite(ser.x[j]) || !std::isfinite(ser.y[j])) {
                continue;
            }
            pts += num(px(ser.x[j])) + "," + num(py(ser.y[j])) + " ";
            if (ser.markers) {
                s += "<circle cx=\"" + num(px(ser.x[j])) + "\" cy=\"" + num(py(ser.y[j])) +
                     "\" r=\"3\" fill=\"" + col + "\"/>\n";
            }
        }
        s += "<polyline fill=\"none\" stroke=\"" + col + "\" stroke-width=\"1.5\"" +
             (ser.dashed ? " stroke-dasharray=\"6,4\"" : "") + " points=\"" + pts + "\"/>\n";
        const double ly = top + 14 + 16 * static_cast<double>(i);
        s += "<line x1=\"" + num(left + w - 150) + "\" y1=\"" + num(ly) + "\" x2=\"" +
             num(left + w - 125) + "\" y2=\"" + num(ly) + "\" stroke=\"" + col +
             "\" stroke-width=\"2\"" + (ser.dashed ? " stroke-dasharray=\"6,4\"" : "") +
             "/>\n";
        s += "<text x=\"" + num(left + w - 120) + "\" y=\"" + num(ly + 4) + "\">" +
             detail::escape(ser.name) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

inline void write(const std::string &path, const Plot &plot) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path);
    }
    out << render(plot);
}

} // namespace hvqa::svg
