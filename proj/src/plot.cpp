#include "semiflow/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace semiflow {

namespace {

constexpr double kWidth = 800.0, kHeight = 500.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;
const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string tick_label(double v, double step) {
    if (std::abs(v) < step * 1e-9) v = 0.0;
    return fmt("%.6g", v);
}

std::string escape(const std::string& s) {
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

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
    if (!(hi > lo)) throw std::invalid_argument("tick range must be non-empty");
    const double raw = (hi - lo) / std::max(1, target - 1);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = 10.0 * mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> ticks;
    const long first = long(std::ceil(lo / step - 1e-9));
    const long last = long(std::floor(hi / step + 1e-9));
    for (long k = first; k <= last; ++k) ticks.push_back(double(k) * step);
    return ticks;
}

std::string render_svg(const CsvTable& table, const PlotOptions& options) {
    if (table.header.empty() || table.columns.empty()) throw std::runtime_error("CSV has no columns");
    const bool two_d = table.header.size() >= 2 && table.header[1] == "y";
    const std::size_t first_value = two_d ? 2 : 1;
    if (table.header[0] != "x" || table.header.size() <= first_value) {
        throw std::runtime_error("CSV must have an x column and at least one value column");
    }
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < table.columns[0].size(); ++r) {
        if (!two_d || table.columns[1][r] == 0.0) rows.push_back(r);
    }
    if (rows.empty()) throw std::runtime_error("CSV has no rows to plot");

    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
    for (std::size_t r : rows) {
        x_lo = std::min(x_lo, table.columns[0][r]);
        x_hi = std::max(x_hi, table.columns[0][r]);
        for (std::size_t c = first_value; c < table.header.size(); ++c) {
            y_lo = std::min(y_lo, table.columns[c][r]);
            y_hi = std::max(y_hi, table.columns[c][r]);
        }
    }
    if (!std::isfinite(x_lo) || !std::isfinite(y_lo) || !std::isfinite(x_hi) || !std::isfinite(y_hi)) {
        throw std::runtime_error("CSV contains non-finite values");
    }
    if (x_hi == x_lo) {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    if (y_hi == y_lo) {
        const double pad = std::max(1.0, std::abs(y_lo));
        y_lo -= pad;
        y_hi += pad;
    }
    const auto xt = nice_ticks(x_lo, x_hi);
    const auto yt = nice_ticks(y_lo, y_hi);
    const double x_step = xt.size() > 1 ? xt[1] - xt[0] : 1.0;
    const double y_step = yt.size() > 1 ? yt[1] - yt[0] : 1.0;
    // Extend the y range to whole ticks so the top label sits on the frame.
    y_lo = std::min(y_lo, std::floor(y_lo / y_step + 1e-9) * y_step);
    y_hi = std::max(y_hi, std::ceil(y_hi / y_step - 1e-9) * y_step);
    const auto yt_full = nice_ticks(y_lo, y_hi);

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * ph; };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" width=\"800\" height=\"500\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
    if (!options.title.empty()) {
        svg += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
               escape(options.title) + "</text>\n";
    }
    svg += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (double t : xt) svg += "<line x1=\"" + fmt("%.2f", px(t)) + "\" y1=\"" + fmt("%.2f", kTop) + "\" x2=\"" + fmt("%.2f", px(t)) + "\" y2=\"" + fmt("%.2f", kTop + ph) + "\"/>\n";
    for (double t : yt_full) svg += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", py(t)) + "\" x2=\"" + fmt("%.2f", kLeft + pw) + "\" y2=\"" + fmt("%.2f", py(t)) + "\"/>\n";
    svg += "</g>\n";
    svg += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) + "\" width=\"" + fmt("%.2f", pw) +
           "\" height=\"" + fmt("%.2f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
    svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (double t : xt) {
        svg += "<text x=\"" + fmt("%.2f", px(t)) + "\" y=\"" + fmt("%.2f", kTop + ph + 18) + "\" text-anchor=\"middle\">" +
               tick_label(t, x_step) + "</text>\n";
    }
    for (double t : yt_full) {
        svg += "<text x=\"" + fmt("%.2f", kLeft - 8) + "\" y=\"" + fmt("%.2f", py(t) + 4) + "\" text-anchor=\"end\">" +
               tick_label(t, y_step) + "</text>\n";
    }
    svg += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) + "\" y=\"" + fmt("%.2f", kHeight - 10) + "\" text-anchor=\"middle\">x</text>\n";
    svg += "</g>\n";

    const std::size_t n_series = table.header.size() - first_value;
    for (std::size_t s = 0; s < n_series; ++s) {
        const std::size_t c = first_value + s;
        std::string points;
        for (std::size_t r : rows) {
            if (!points.empty()) points += ' ';
            points += fmt("%.2f", px(table.columns[0][r])) + "," + fmt("%.2f", py(table.columns[c][r]));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(kColours[s % 6]) + "\" stroke-width=\"1.5\" points=\"" +
               points + "\"/>\n";
    }
    if (n_series > 1) {
        svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
        for (std::size_t s = 0; s < n_series; ++s) {
            const double y = kTop + 16 + 18.0 * double(s);
            const double x = kLeft + pw - 120;
            svg += "<line x1=\"" + fmt("%.2f", x) + "\" y1=\"" + fmt("%.2f", y) + "\" x2=\"" + fmt("%.2f", x + 24) +
                   "\" y2=\"" + fmt("%.2f", y) + "\" stroke=\"" + kColours[s % 6] + "\" stroke-width=\"2\"/>\n";
            svg += "<text x=\"" + fmt("%.2f", x + 30) + "\" y=\"" + fmt("%.2f", y + 4) + "\">" +
                   escape(table.header[first_value + s]) + "</text>\n";
        }
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void emit_plot(const std::filesystem::path& csv_path, const std::filesystem::path& svg_path, const PlotOptions& options) {
    const std::string svg = render_svg(read_csv(csv_path), options);
    std::ofstream out(svg_path, std::ios::binary);
    out << svg;
    if (!out) throw std::runtime_error("cannot write " + svg_path.string());
}

}  // namespace semiflow
