#include "qrv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qrv/errors.hpp"

namespace qrv::svg {

LineChart::LineChart(std::string title, std::string x_label, std::string y_label, int width,
                     int height)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)),
      width_(width), height_(height) {}

void LineChart::add_series(const std::string& name, const std::vector<double>& x,
                           const std::vector<double>& y, const std::string& color) {
    if (x.size() != y.size()) throw DataError("svg series: x/y length mismatch");
    series_.push_back({name, x, y, color});
}

void LineChart::add_band(const std::vector<double>& x, const std::vector<double>& lo,
                         const std::vector<double>& hi, const std::string& color) {
    if (x.size() != lo.size() || x.size() != hi.size())
        throw DataError("svg band: length mismatch");
    bands_.push_back({x, lo, hi, color});
}

void LineChart::add_hline(double y, const std::string& color) { hlines_.emplace_back(y, color); }

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// round tick spacing to 1/2/5 * 10^k
double nice_step(double span, int target_ticks) {
    const double raw = span / std::max(1, target_ticks);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double step = 10.0;
    if (frac <= 1.0) step = 1.0;
    else if (frac <= 2.0) step = 2.0;
    else if (frac <= 5.0) step = 5.0;
    return step * mag;
}

}  // namespace

std::string LineChart::render() const {
    const double ml = 64, mr = 18, mt = 36, mb = 46;  // margins
    const double pw = width_ - ml - mr, ph = height_ - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto expand = [&](const std::vector<double>& xs, const std::vector<double>& ys) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            xmin = std::min(xmin, xs[i]);
            xmax = std::max(xmax, xs[i]);
            ymin = std::min(ymin, ys[i]);
            ymax = std::max(ymax, ys[i]);
        }
    };
    for (const auto& s : series_) expand(s.x, s.y);
    for (const auto& b : bands_) {
        expand(b.x, b.lo);
        expand(b.x, b.hi);
    }
    for (const auto& [y, c] : hlines_) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    if (!std::isfinite(xmin) || !std::isfinite(ymin)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
       << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width_ / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\" "
          "font-family=\"sans-serif\">" << title_ << "</text>\n";

    // axes + ticks
    const double xstep = nice_step(xmax - xmin, 6), ystep = nice_step(ymax - ymin, 6);
    os << "<g font-size=\"10\" font-family=\"sans-serif\" fill=\"#333\">\n";
    for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-12; x += xstep) {
        os << "<line x1=\"" << px(x) << "\" y1=\"" << mt << "\" x2=\"" << px(x) << "\" y2=\""
           << mt + ph << "\" stroke=\"#eee\"/>\n";
        os << "<text x=\"" << px(x) << "\" y=\"" << mt + ph + 14 << "\" text-anchor=\"middle\">"
           << fmt(x) << "</text>\n";
    }
    for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-12; y += ystep) {
        os << "<line x1=\"" << ml << "\" y1=\"" << py(y) << "\" x2=\"" << ml + pw << "\" y2=\""
           << py(y) << "\" stroke=\"#eee\"/>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << py(y) + 3 << "\" text-anchor=\"end\">"
           << fmt(y) << "</text>\n";
    }
    os << "</g>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height_ - 8
       << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << x_label_
       << "</text>\n";
    os << "<text x=\"14\" y=\"" << mt + ph / 2
       << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\" transform=\"rotate(-90 14 "
       << mt + ph / 2 << ")\">" << y_label_ << "</text>\n";

    for (const auto& b : bands_) {
        os << "<polygon points=\"";
        for (std::size_t i = 0; i < b.x.size(); ++i) os << px(b.x[i]) << "," << py(b.hi[i]) << " ";
        for (std::size_t i = b.x.size(); i-- > 0;) os << px(b.x[i]) << "," << py(b.lo[i]) << " ";
        os << "\" fill=\"" << b.color << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    }
    for (const auto& [y, color] : hlines_) {
        os << "<line x1=\"" << ml << "\" y1=\"" << py(y) << "\" x2=\"" << ml + pw << "\" y2=\""
           << py(y) << "\" stroke=\"" << color << "\" stroke-dasharray=\"4 3\"/>\n";
    }
    int legend_y = static_cast<int>(mt) + 12;
    for (const auto& s : series_) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) os << px(s.x[i]) << "," << py(s.y[i]) << " ";
        os << "\"/>\n";
        os << "<text x=\"" << ml + pw - 6 << "\" y=\"" << legend_y
           << "\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\" fill=\"" << s.color
           << "\">" << s.name << "</text>\n";
        legend_y += 13;
    }
    os << "</svg>\n";
    return os.str();
}

void LineChart::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << render();
}

}  // namespace qrv::svg
