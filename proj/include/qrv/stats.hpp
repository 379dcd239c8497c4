#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qrv::stats {

double norm_cdf(double x);
double norm_pdf(double x);
double norm_quantile(double p);       // inverse standard normal CDF
double chi2_sf(double x, int df);     // upper tail P(X > x)

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased (n-1)

// empirical quantile, linear interpolation between order statistics (type 7)
double quantile(std::span<const double> x, double p);

// Newey-West long-run variance of a series (Bartlett kernel, `lags` >= 0).
double newey_west_variance(std::span<const double> x, int lags);

// Kolmogorov-Smirnov distance of a sample against U(0,1).
double ks_distance_uniform(std::span<const double> pvals);

}  // namespace qrv::stats
