#pragma once

// Artifact writers: RFC 4180 CSV rows and a standalone SVG scatter plot of
// objective-space fronts.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sapgm/errors.hpp"
#include "sapgm/metrics.hpp"

namespace sapgm {

/// Shortest round-tripping text form of a double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Quotes a field when it carries a comma, quote or line break.
inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            line += ',';
        }
        line += csv_field(fields[i]);
    }
    line += "\r\n";
    return line;
}

/// Problem names may carry characters that are awkward in file names ("CB3&LQ").
inline std::string file_stem(std::string_view name) {
    std::string out(name);
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
            c = '_';
        }
    }
    return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

namespace detail {

struct AxisScale {
    double lo;
    double hi;
    double step;
};

// Tick spacing of 1, 2 or 5 times a power of ten giving about five intervals.
inline AxisScale nice_scale(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = std::max(0.5, 0.05 * std::abs(lo));
        lo -= pad;
        hi += pad;
    }
    const double raw = (hi - lo) / 5.0;
    const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
    double step = magnitude;
    for (double f : {1.0, 2.0, 5.0, 10.0}) {
        step = f * magnitude;
        if (raw <= step) {
            break;
        }
    }
    return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

inline std::string svg_escape(std::string_view s) {
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

inline std::string solver_color(const std::string& solver) {
    if (solver == "sapgm") return "#d62728";
    if (solver == "baseline") return "#1f77b4";
    return "#555555";
}

inline std::string tick_label(double v, double step) {
    if (std::abs(v) < 1e-12 * step) {
        v = 0.0;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace detail

struct SvgLayout {
    double width = 640;
    double height = 480;
    double left = 70;
    double right = 20;
    double top = 40;
    double bottom = 60;
};

/// Scatter of the first two objectives per solver. Three-objective fronts are
/// drawn as their (F1, F2) projection with a note; other sizes are rejected.
inline std::string render_svg_scatter(const std::map<std::string, std::vector<FrontPoint>>& fronts,
                                      const std::string& title, const SvgLayout& layout = {}) {
    std::size_t m = 0;
    std::size_t total = 0;
    for (const auto& [solver, pts] : fronts) {
        for (const auto& p : pts) {
            const auto dim = static_cast<std::size_t>(p.F.size());
            if (dim != 2 && dim != 3) {
                throw InvalidInput("render_svg_scatter: need 2 or 3 objectives");
            }
            if (m != 0 && dim != m) {
                throw InvalidInput("render_svg_scatter: mixed objective counts");
            }
            m = dim;
            ++total;
        }
    }

    std::ostringstream svg;
    const double W = layout.width;
    const double H = layout.height;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
        << W << ' ' << H << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text class=\"title\" x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"16\">" << detail::svg_escape(title) << "</text>\n";

    if (total == 0) {
        svg << "<text class=\"no-data\" x=\"" << W / 2 << "\" y=\"" << H / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">no data</text>\n</svg>\n";
        return svg.str();
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    double x_lo = inf, x_hi = -inf, y_lo = inf, y_hi = -inf;
    for (const auto& [solver, pts] : fronts) {
        for (const auto& p : pts) {
            x_lo = std::min(x_lo, p.F[0]);
            x_hi = std::max(x_hi, p.F[0]);
            y_lo = std::min(y_lo, p.F[1]);
            y_hi = std::max(y_hi, p.F[1]);
        }
    }
    const auto xs = detail::nice_scale(x_lo, x_hi);
    const auto ys = detail::nice_scale(y_lo, y_hi);

    const double px0 = layout.left;
    const double px1 = W - layout.right;
    const double py0 = layout.top;
    const double py1 = H - layout.bottom;
    auto map_x = [&](double v) { return px0 + (v - xs.lo) / (xs.hi - xs.lo) * (px1 - px0); };
    auto map_y = [&](double v) { return py1 - (v - ys.lo) / (ys.hi - ys.lo) * (py1 - py0); };

    svg << "<rect class=\"axes\" x=\"" << px0 << "\" y=\"" << py0 << "\" width=\"" << px1 - px0 << "\" height=\""
        << py1 - py0 << "\" fill=\"none\" stroke=\"black\"/>\n";

    svg << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
    const auto x_ticks = static_cast<int>(std::lround((xs.hi - xs.lo) / xs.step));
    for (int i = 0; i <= x_ticks; ++i) {
        const double v = xs.lo + i * xs.step;
        const double px = map_x(v);
        svg << "<line x1=\"" << px << "\" y1=\"" << py1 << "\" x2=\"" << px << "\" y2=\"" << py1 + 5
            << "\" stroke=\"black\"/>";
        svg << "<text x=\"" << px << "\" y=\"" << py1 + 18 << "\" text-anchor=\"middle\">"
            << detail::tick_label(v, xs.step) << "</text>\n";
    }
    const auto y_ticks = static_cast<int>(std::lround((ys.hi - ys.lo) / ys.step));
    for (int i = 0; i <= y_ticks; ++i) {
        const double v = ys.lo + i * ys.step;
        const double py = map_y(v);
        svg << "<line x1=\"" << px0 - 5 << "\" y1=\"" << py << "\" x2=\"" << px0 << "\" y2=\"" << py
            << "\" stroke=\"black\"/>";
        svg << "<text x=\"" << px0 - 8 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
            << detail::tick_label(v, ys.step) << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << H - 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">F1</text>\n";
    svg << "<text x=\"18\" y=\"" << (py0 + py1) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"13\" transform=\"rotate(-90 18 " << (py0 + py1) / 2 << ")\">F2</text>\n";
    if (m == 3) {
        svg << "<text class=\"note\" x=\"" << px1 << "\" y=\"" << H - 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">projection onto (F1, F2)</text>\n";
    }

    for (const auto& [solver, pts] : fronts) {
        const std::string color = detail::solver_color(solver);
        svg << "<g class=\"series\" data-solver=\"" << detail::svg_escape(solver) << "\">\n";
        for (const auto& p : pts) {
            svg << "<circle class=\"marker\" cx=\"" << map_x(p.F[0]) << "\" cy=\"" << map_y(p.F[1])
                << "\" r=\"3\" fill=\"" << color << "\" fill-opacity=\"0.7\"/>\n";
        }
        svg << "</g>\n";
    }

    svg << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    double ly = py0 + 12;
    for (const auto& [solver, pts] : fronts) {
        svg << "<g class=\"legend-entry\"><rect x=\"" << px1 - 110 << "\" y=\"" << ly - 9
            << "\" width=\"10\" height=\"10\" fill=\"" << detail::solver_color(solver) << "\"/><text x=\""
            << px1 - 94 << "\" y=\"" << ly << "\">" << detail::svg_escape(solver) << " (" << pts.size()
            << ")</text></g>\n";
        ly += 16;
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

inline void emit_svg_scatter(const std::map<std::string, std::vector<FrontPoint>>& fronts, const std::string& title,
                             const std::filesystem::path& path) {
    write_text_file(path, render_svg_scatter(fronts, title));
}

} // namespace sapgm
