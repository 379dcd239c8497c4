#include "qrv/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>

#include "qrv/errors.hpp"
#include "qrv/kernels.hpp"

namespace qrv::stats {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw NumericError("norm_quantile: p outside (0,1)");
    static const boost::math::normal_distribution<double> n01;
    return boost::math::quantile(n01, p);
}

double chi2_sf(double x, int df) {
    if (df <= 0) throw NumericError("chi2_sf: df must be positive");
    if (x <= 0.0) return 1.0;
    boost::math::chi_squared_distribution<double> d(df);
    return boost::math::cdf(boost::math::complement(d, x));
}

double mean(std::span<const double> x) {
    if (x.empty()) throw NumericError("mean of empty series");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw NumericError("variance needs at least 2 observations");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double quantile(std::span<const double> x, double p) {
    if (x.empty()) throw NumericError("quantile of empty series");
    if (!(p >= 0.0 && p <= 1.0)) throw NumericError("quantile: p outside [0,1]");
    std::vector<double> v(x.begin(), x.end());
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    const double h = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double w = h - static_cast<double>(lo);
    return (1.0 - w) * v[lo] + w * v[hi];
}

double newey_west_variance(std::span<const double> x, int lags) {
    const std::size_t n = x.size();
    if (n < 2) throw NumericError("newey_west_variance needs at least 2 observations");
    if (lags < 0) lags = 0;
    const double m = mean(x);
    std::vector<double> c(x.begin(), x.end());
    for (double& v : c) v -= m;
    const double nd = static_cast<double>(n);
    double v0 = kernels::dot(c, c) / nd;
    double lrv = v0;
    for (int j = 1; j <= lags && static_cast<std::size_t>(j) < n; ++j) {
        const std::span<const double> a(c.data(), n - j);
        const std::span<const double> b(c.data() + j, n - j);
        const double gj = kernels::dot(a, b) / nd;
        const double w = 1.0 - static_cast<double>(j) / (lags + 1.0);
        lrv += 2.0 * w * gj;
    }
    return lrv;
}

double ks_distance_uniform(std::span<const double> pvals) {
    std::vector<double> v(pvals.begin(), pvals.end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(std::fabs(v[i] - lo), std::fabs(v[i] - hi)));
    }
    return d;
}

}  // namespace qrv::stats
