#pragma once

#include <string>
#include <vector>

namespace pwmstab {

/// Minimal deterministic SVG 1.1 line plot: named series as polylines over a
/// shared linear axis box, optional vertical markers, no external
/// dependencies. NaN samples break the polyline.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label);

    void add_series(const std::string& name,
                    const std::vector<double>& x,
                    const std::vector<double>& y);
    void add_vertical_marker(const std::string& name, double x);

    std::string render() const;

private:
    std::string title_;
    std::string x_label_;
    struct Series {
        std::string name;
        std::vector<double> x, y;
    };
    struct Marker {
        std::string name;
        double x;
    };
    std::vector<Series> series_;
    std::vector<Marker> markers_;
};

} // namespace pwmstab
