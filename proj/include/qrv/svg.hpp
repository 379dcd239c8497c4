#pragma once

#include <string>
#include <vector>

namespace qrv::svg {

// Minimal native SVG line charts (series, shaded bands, axes with ticks).
class LineChart {
public:
    LineChart(std::string title, std::string x_label, std::string y_label, int width = 720,
              int height = 440);

    void add_series(const std::string& name, const std::vector<double>& x,
                    const std::vector<double>& y, const std::string& color = "#1f77b4");
    // shaded band between lo and hi (confidence intervals)
    void add_band(const std::vector<double>& x, const std::vector<double>& lo,
                  const std::vector<double>& hi, const std::string& color = "#1f77b4");
    void add_hline(double y, const std::string& color = "#999999");

    std::string render() const;
    void write(const std::string& path) const;

private:
    struct Series {
        std::string name;
        std::vector<double> x, y;
        std::string color;
    };
    struct Band {
        std::vector<double> x, lo, hi;
        std::string color;
    };
    std::string title_, x_label_, y_label_;
    int width_, height_;
    std::vector<Series> series_;
    std::vector<Band> bands_;
    std::vector<std::pair<double, std::string>> hlines_;
};

}  // namespace qrv::svg
