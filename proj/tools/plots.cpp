#include "plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace brainalign::app {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s)
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

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v)
    {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void settle()
    {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

std::string frame(const std::string& title, const std::string& x_label, const std::string& y_label, const Range& yr)
{
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                    num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
         "</text>\n";
    const double x1 = kWidth - kRight, y1 = kHeight - kBottom;
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y1) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(y1) +
         "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = yr.lo + (yr.hi - yr.lo) * k / 4.0;
        const double y = yr.map(v, y1, kTop);
        s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + tick(v) +
             "</text>\n";
    }
    s += "<text x=\"" + num((kLeft + x1) / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\">" +
         escape(x_label) + "</text>\n";
    s += "<text x=\"16\" y=\"" + num((kTop + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num((kTop + y1) / 2) + ")\">" + escape(y_label) + "</text>\n";
    return s;
}

} // namespace

std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<double>& x, const std::vector<Series>& series)
{
    Range xr, yr;
    for (double v : x)
        xr.add(v);
    for (const auto& s : series)
        for (double v : s.y)
            yr.add(v);
    xr.settle();
    yr.settle();

    const double x1 = kWidth - kRight, y1 = kHeight - kBottom;
    std::string svg = frame(title, x_label, y_label, yr);
    for (double v : x)
        svg += "<text x=\"" + num(xr.map(v, kLeft, x1)) + "\" y=\"" + num(y1 + 16) + "\" text-anchor=\"middle\">" +
               tick(v) + "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kPalette[i % std::size(kPalette)];
        std::string d;
        bool pen_down = false;
        for (std::size_t k = 0; k < x.size() && k < series[i].y.size(); ++k) {
            const double v = series[i].y[k];
            if (!std::isfinite(v)) {
                pen_down = false;
                continue;
            }
            d += (pen_down ? " L" : " M") + num(xr.map(x[k], kLeft, x1)) + " " + num(yr.map(v, y1, kTop));
            pen_down = true;
        }
        if (!d.empty())
            svg += "<path d=\"" + d.substr(1) + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        const double ly = kTop + 16.0 * static_cast<double>(i);
        svg += "<rect x=\"" + num(x1 + 12) + "\" y=\"" + num(ly - 9) + "\" width=\"10\" height=\"10\" fill=\"" +
               color + "\"/>\n";
        svg += "<text x=\"" + num(x1 + 26) + "\" y=\"" + num(ly) + "\">" + escape(series[i].label) + "</text>\n";
    }
    return svg + "</svg>\n";
}

std::string bar_plot(const std::string& title, const std::string& y_label, const std::vector<std::string>& labels,
                     const std::vector<double>& values)
{
    Range yr;
    yr.add(0.0);
    for (double v : values)
        yr.add(v);
    yr.settle();

    const double x1 = kWidth - kRight, y1 = kHeight - kBottom;
    std::string svg = frame(title, "", y_label, yr);
    const double slot = (x1 - kLeft) / static_cast<double>(std::max<std::size_t>(values.size(), 1));
    const double base = yr.map(0.0, y1, kTop);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
        if (std::isfinite(values[i])) {
            const double top = yr.map(values[i], y1, kTop);
            svg += "<rect x=\"" + num(cx - slot * 0.35) + "\" y=\"" + num(std::min(top, base)) + "\" width=\"" +
                   num(slot * 0.7) + "\" height=\"" + num(std::fabs(base - top)) + "\" fill=\"" + kPalette[0] +
                   "\"/>\n";
        }
        if (i < labels.size())
            svg += "<text x=\"" + num(cx) + "\" y=\"" + num(y1 + 16) + "\" text-anchor=\"middle\">" +
                   escape(labels[i]) + "</text>\n";
    }
    return svg + "</svg>\n";
}

std::string heat_grid(const std::string& title, const std::vector<std::string>& rows,
                      const std::vector<std::string>& columns, const Matrix& values)
{
    Range vr;
    for (Index i = 0; i < values.rows(); ++i)
        for (Index j = 0; j < values.cols(); ++j)
            vr.add(values(i, j));
    vr.settle();

    const double left = 110, top = 40;
    const double cell_w = (kWidth - left - 20) / static_cast<double>(std::max<Index>(values.cols(), 1));
    const double cell_h = (kHeight - top - kBottom) / static_cast<double>(std::max<Index>(values.rows(), 1));
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                      num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
           "</text>\n";
    for (Index i = 0; i < values.rows(); ++i) {
        const double y = top + cell_h * static_cast<double>(i);
        if (static_cast<std::size_t>(i) < rows.size())
            svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y + cell_h / 2 + 4) + "\" text-anchor=\"end\">" +
                   escape(rows[static_cast<std::size_t>(i)]) + "</text>\n";
        for (Index j = 0; j < values.cols(); ++j) {
            const double v = values(i, j);
            // white (low) to dark blue (high); grey for missing cells
            std::string fill = "#dddddd";
            if (std::isfinite(v)) {
                const double f = vr.map(v, 0.0, 1.0);
                char buf[16];
                std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(255 - 225 * f),
                              static_cast<int>(255 - 175 * f), static_cast<int>(255 - 75 * f));
                fill = buf;
            }
            svg += "<rect x=\"" + num(left + cell_w * static_cast<double>(j)) + "\" y=\"" + num(y) + "\" width=\"" +
                   num(cell_w) + "\" height=\"" + num(cell_h) + "\" fill=\"" + fill + "\"/>\n";
        }
    }
    for (std::size_t j = 0; j < columns.size(); ++j)
        svg += "<text x=\"" + num(left + cell_w * (static_cast<double>(j) + 0.5)) + "\" y=\"" +
               num(top + cell_h * static_cast<double>(values.rows()) + 16) + "\" text-anchor=\"middle\">" +
               escape(columns[j]) + "</text>\n";
    svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 10) + "\" text-anchor=\"middle\">columns: layers; shade from " +
           tick(vr.lo) + " to " + tick(vr.hi) + "</text>\n";
    return svg + "</svg>\n";
}

} // namespace brainalign::app
