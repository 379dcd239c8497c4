#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qrv/rng.hpp"

namespace qrv::arfima {

// Parameters of the log-RV process (1 - phi L)(1 - L)^d (x - mu) = (1 - psi L) u,
// u ~ iid N(0, sigma_u2). psi is 0 unless the MA term is explicitly enabled.
struct ArfimaParams {
    double mu = 0.0;
    double phi = 0.0;
    double d = 0.0;
    double sigma_u2 = 1.0;
    double ma_psi = 0.0;

    void validate() const;  // |phi|<1, -0.5<d<0.5, sigma_u2>0
};

// Expansion coefficients of (1-L)^d: w[0] = 1, w[k] = w[k-1] * (k-1-d) / k.
std::vector<double> frac_diff_weights(double d, int k_max);

// AR(infinity) coefficients of (1 - phi L)(1 - L)^d, truncated.
std::vector<double> ar_coefficients(double phi, double d, int k_max);

// Gaussian conditional-sum-of-squares log-likelihood with the fractional
// filter truncated at `truncation` lags; pre-sample values are the series
// mean (zero after demeaning).
double arfima_loglik(const ArfimaParams& params, const std::vector<double>& log_rv,
                     int truncation = 1000);

struct ArfimaFit {
    ArfimaParams params;
    std::vector<double> tstats;  // mu, phi, d, sigma_u2
    double loglik = 0.0;
    double aic = 0.0;  // (2k - 2 logL) / n
    int n = 0;
};

struct FitOptions {
    int truncation = 1000;
    bool estimate_ma = false;  // enable the psi (MA) term
    int max_iterations = 400;
};

ArfimaFit fit_arfima(const std::vector<double>& log_rv, const FitOptions& opts = {});

struct MixtureForecast {
    int horizon = 1;
    std::map<double, double> rv_quantiles;      // quantiles of sqrt(sum RV)
    std::map<double, double> return_quantiles;  // quantiles of cumulative return
    int n_draws = 0;
    std::uint64_t seed = 0;
};

struct ForecastOptions {
    int n_draws = 100000;
    std::uint64_t seed = 1;
    int truncation = 1000;
};

// Quantile forecasts from the lognormal-normal mixture. One-day RV quantiles
// come from the Gaussian predictive of log RV; everything else is simulated,
// with return quantiles solved from the simulated mixture CDF.
MixtureForecast forecast_mixture(const ArfimaParams& params, const std::vector<double>& log_rv,
                                 int horizon, const std::vector<double>& alphas,
                                 const ForecastOptions& opts = {});

// Simulates a log-RV series from the model (truncated AR(inf) recursion with
// burn-in). Used as the data generator in recovery studies.
std::vector<double> simulate_arfima(const ArfimaParams& params, std::size_t n, std::size_t burn_in,
                                    Rng& rng, int truncation = 1000);

std::string params_to_json(const ArfimaFit& fit);
std::string forecast_to_json(const MixtureForecast& f);

}  // namespace qrv::arfima
