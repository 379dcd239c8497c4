#pragma once

#include <string>
#include <vector>

#include "qrv/timeutil.hpp"

namespace qrv::iv {

enum class OptionType { Put, Call };

struct OptionQuote {
    Date quote_date = 0;
    Date expiry = 0;
    Date underlying_future_expiry = 0;  // defaults to expiry when unknown
    double strike = 0.0;
    OptionType type = OptionType::Call;
    double price = 0.0;
    double futures_price = 0.0;
    double rate = 0.0;  // continuously compounded zero rate to expiry

    double tau() const { return static_cast<double>(expiry - quote_date) / 365.0; }
    double discount() const;
};

// Discounted European futures-option value; degenerate tau or sigma gives
// discounted intrinsic.
double black76_price(double F, double X, double tau, double sigma, double discount,
                     OptionType type);

// Quadratic-approximation American futures-option value (early exercise via
// the critical futures price; at rate 0 it equals the European value).
double baw_price(double F, double X, double tau, double sigma, double rate, OptionType type);

// sigma in [1e-4, 5] matching the quote's price under BAW; NoBracket if the
// price is unattainable.
double invert_baw_iv(const OptionQuote& quote);

struct SmileGrid {
    Date expiry = 0;
    std::vector<double> moneyness;  // k = log(X/F), strictly increasing
    std::vector<double> iv;
    double F = 0.0;
    double tau = 0.0;
};

struct SmileOptions {
    int grid_points = 2001;
    double span_std_devs = 10.0;  // +- span in units of sigma_ATM * sqrt(tau)
};

struct SmileBuildReport {
    std::size_t used_quotes = 0;
    std::vector<std::string> dropped;  // inversion failures, with reasons
};

// Implied-vol smile for one expiry from out-of-the-money quotes: linear
// interpolation in log-moneyness, flat extrapolation beyond the extreme
// strikes. Needs at least 2 usable OTM quotes.
SmileGrid build_smile(const std::vector<OptionQuote>& quotes, const SmileOptions& opts = {},
                      SmileBuildReport* report = nullptr);

struct TermPoint {
    Date expiry = 0;
    double imv = 0.0;      // annualized variance
    double discount = 1.0;
    double tau = 0.0;
};

// Variance-swap rate: reprice the smile with Black-76 and integrate the
// out-of-the-money option prices over strike (trapezoid), scaled by
// 2 / (discount * tau).
TermPoint synth_variance_swap(const SmileGrid& smile, double discount);

// 30-day term interpolation between two maturities.
double interp_30d(const TermPoint& p1, const TermPoint& p2, Date quote_date);

struct DroppedQuote {
    OptionQuote quote;
    std::string reason;
};

struct CleanResult {
    std::vector<OptionQuote> kept;
    std::vector<DroppedQuote> dropped;
};

// Filters, in order: >= 10 calendar days to expiry, price >= 0.05, American
// no-arbitrage bounds (intrinsic <= price, call <= F, put <= X).
CleanResult clean_quotes(const std::vector<OptionQuote>& raw);

struct ImvPoint {
    Date day = 0;
    double imv_30d = 0.0;
    double iv_30d = 0.0;
    bool single_expiry = false;  // nearest-maturity fallback used
};

struct PipelineOptions {
    SmileOptions smile;
    bool allow_single_expiry = true;
};

// Full per-day pipeline over a quote file: clean, build smiles for the two
// nearest maturities, synthesize, interpolate to 30 days.
std::vector<ImvPoint> compute_impvol_series(const std::vector<OptionQuote>& quotes,
                                            const PipelineOptions& opts,
                                            std::vector<std::string>* warnings = nullptr);

// CSV I/O per the external interface. Quotes: date, expiry, strike, cp_flag,
// settle_price, futures_price (optional future_expiry). Zero curve: date,
// days, rate; linearly interpolated in days to expiry.
std::vector<OptionQuote> read_quotes_csv(const std::string& quotes_path,
                                         const std::string& rates_path);
void write_impvol_csv(const std::string& path, const std::vector<ImvPoint>& series);
std::vector<std::pair<Date, double>> read_impvol_csv(const std::string& path);

}  // namespace qrv::iv
