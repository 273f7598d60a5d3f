#include "pwmstab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pwmstab/report.hpp"

namespace pwmstab {

namespace {

constexpr double kWidth = 920.0, kHeight = 560.0;
constexpr double kLeft = 70.0, kRight = 890.0, kTop = 50.0, kBottom = 480.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                         "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
}

} // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label)
    : title_(std::move(title)), x_label_(std::move(x_label)) {}

void SvgPlot::add_series(const std::string& name, const std::vector<double>& x,
                         const std::vector<double>& y) {
    series_.push_back(Series{name, x, y});
}

void SvgPlot::add_vertical_marker(const std::string& name, double x) {
    markers_.push_back(Marker{name, x});
}

std::string SvgPlot::render() const {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    bool have = false;
    for (const auto& s : series_) {
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!have) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                have = true;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    }
    if (!have) {
        xmin = ymin = 0.0;
        xmax = ymax = 1.0;
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    // small padding so curves do not sit on the frame
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) {
        return kLeft + (x - xmin) / (xmax - xmin) * (kRight - kLeft);
    };
    auto py = [&](double y) {
        return kBottom - (y - ymin) / (ymax - ymin) * (kBottom - kTop);
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
           "width=\""
        << fmt(kWidth) << "\" height=\"" << fmt(kHeight)
        << "\" viewBox=\"0 0 " << fmt(kWidth) << " " << fmt(kHeight)
        << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << fmt(kWidth) << "\" height=\""
        << fmt(kHeight) << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fmt(kWidth / 2)
        << "\" y=\"28\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"16\">"
        << title_ << "</text>\n";

    // frame and tick labels
    svg << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop)
        << "\" width=\"" << fmt(kRight - kLeft) << "\" height=\""
        << fmt(kBottom - kTop)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        svg << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << fmt(kBottom + 20)
            << "\" text-anchor=\"middle\" font-family=\"monospace\" "
               "font-size=\"11\">"
            << fmt(fx) << "</text>\n";
        svg << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py(fy) + 4)
            << "\" text-anchor=\"end\" font-family=\"monospace\" "
               "font-size=\"11\">"
            << fmt(fy) << "</text>\n";
        if (i > 0 && i < 4) {
            svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py(fy))
                << "\" x2=\"" << fmt(kRight) << "\" y2=\"" << fmt(py(fy))
                << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        }
    }
    svg << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\""
        << fmt(kBottom + 42)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"13\">"
        << x_label_ << "</text>\n";

    // reference line at y = 1 when it is inside range (criteria thresholds)
    if (ymin < 1.0 && 1.0 < ymax) {
        svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py(1.0))
            << "\" x2=\"" << fmt(kRight) << "\" y2=\"" << fmt(py(1.0))
            << "\" stroke=\"#888888\" stroke-width=\"1\" "
               "stroke-dasharray=\"2,3\"/>\n";
    }

    for (size_t si = 0; si < series_.size(); ++si) {
        const auto& s = series_[si];
        const char* color = kColors[si % 6];
        std::string points;
        auto flush = [&]() {
            if (!points.empty()) {
                svg << "<polyline fill=\"none\" stroke=\"" << color
                    << "\" stroke-width=\"1.5\" points=\"" << points
                    << "\"/>\n";
                points.clear();
            }
        };
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            if (!points.empty()) points += ' ';
            points += fmt(px(s.x[i]));
            points += ',';
            points += fmt(py(s.y[i]));
        }
        flush();
        // legend
        const double ly = kTop + 16.0 + 16.0 * static_cast<double>(si);
        svg << "<line x1=\"" << fmt(kLeft + 10) << "\" y1=\"" << fmt(ly - 4)
            << "\" x2=\"" << fmt(kLeft + 34) << "\" y2=\"" << fmt(ly - 4)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fmt(kLeft + 40) << "\" y=\"" << fmt(ly)
            << "\" font-family=\"monospace\" font-size=\"12\">" << s.name
            << "</text>\n";
    }

    for (const auto& m : markers_) {
        if (!std::isfinite(m.x) || m.x < xmin || m.x > xmax) continue;
        svg << "<line x1=\"" << fmt(px(m.x)) << "\" y1=\"" << fmt(kTop)
            << "\" x2=\"" << fmt(px(m.x)) << "\" y2=\"" << fmt(kBottom)
            << "\" stroke=\"#444444\" stroke-width=\"1\" "
               "stroke-dasharray=\"5,4\"/>\n";
        svg << "<text x=\"" << fmt(px(m.x) + 4) << "\" y=\"" << fmt(kTop + 12)
            << "\" font-family=\"monospace\" font-size=\"11\" "
               "transform=\"rotate(90 "
            << fmt(px(m.x) + 4) << " " << fmt(kTop + 12) << ")\">" << m.name
            << " = " << fmt(m.x) << "</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

} // namespace pwmstab
