#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qrv/errors.hpp"
#include "qrv/implied_vol.hpp"
#include "qrv/rng.hpp"
#include "qrv/timeutil.hpp"

using namespace qrv;
using namespace qrv::iv;

namespace {

OptionQuote make_quote(Date qd, int dte, double strike, OptionType type, double price, double F,
                       double rate) {
    OptionQuote q;
    q.quote_date = qd;
    q.expiry = qd + dte;
    q.underlying_future_expiry = q.expiry;
    q.strike = strike;
    q.type = type;
    q.price = price;
    q.futures_price = F;
    q.rate = rate;
    return q;
}

// flat-smile quote set for one expiry: OTM puts below F, OTM calls above
std::vector<OptionQuote> flat_smile_quotes(Date qd, int dte, double F, double sigma, double rate,
                                           int per_side = 6) {
    std::vector<OptionQuote> quotes;
    const double tau = dte / 365.0;
    const double sd = sigma * std::sqrt(tau);
    for (int s = -per_side; s <= per_side; ++s) {
        const double strike = F * std::exp(0.5 * sd * s);
        const OptionType type = strike < F ? OptionType::Put : OptionType::Call;
        const double price = baw_price(F, strike, tau, sigma, rate, type);
        if (price < 0.05) continue;
        quotes.push_back(make_quote(qd, dte, strike, type, price, F, rate));
    }
    return quotes;
}

}  // namespace

TEST_CASE("black76 reference values and limits") {
    // ATM: F = X = 100, sigma 0.2, tau 0.25, df 1
    const double atm = black76_price(100, 100, 0.25, 0.2, 1.0, OptionType::Call);
    // closed form via the normal cdf: 100*(2*Phi(0.05)-1)
    const double phi = 0.5 * std::erfc(-0.05 / std::sqrt(2.0));
    CHECK(atm == doctest::Approx(100.0 * (2.0 * phi - 1.0)).epsilon(1e-12));
    CHECK(atm == doctest::Approx(3.9878).epsilon(1e-4));

    // sigma -> 0 collapses to discounted intrinsic
    CHECK(black76_price(110, 100, 0.5, 0.0, 0.97, OptionType::Call) == doctest::Approx(0.97 * 10.0));
    CHECK(black76_price(90, 100, 0.5, 1e-12, 0.97, OptionType::Put) ==
          doctest::Approx(0.97 * 10.0).epsilon(1e-9));

    // put-call parity
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const double F = 50.0 + 100.0 * rng.uniform();
        const double X = 50.0 + 100.0 * rng.uniform();
        const double tau = 0.05 + rng.uniform();
        const double sigma = 0.05 + 0.6 * rng.uniform();
        const double df = std::exp(-0.05 * tau);
        const double c = black76_price(F, X, tau, sigma, df, OptionType::Call);
        const double p = black76_price(F, X, tau, sigma, df, OptionType::Put);
        CHECK(std::fabs(c - p - df * (F - X)) < 1e-10 * (1.0 + F + X));
    }
}

TEST_CASE("baw boundary cases") {
    // zero rate: American futures options carry no early-exercise premium
    const double c_am = baw_price(100, 95, 0.3, 0.25, 0.0, OptionType::Call);
    const double c_eu = black76_price(100, 95, 0.3, 0.25, 1.0, OptionType::Call);
    CHECK(c_am >= c_eu - 1e-12);
    CHECK(c_am - c_eu < 1e-4);

    // deep in-the-money American put sits on intrinsic
    const double p = baw_price(50, 100, 0.1, 0.2, 0.05, OptionType::Put);
    CHECK(p == doctest::Approx(50.0).epsilon(0.005));
    CHECK(p >= 50.0 - 1e-9);
}

TEST_CASE("baw dominates black76 on a random grid") {
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const double F = 20.0 + 160.0 * rng.uniform();
        const double X = F * std::exp(0.6 * (rng.uniform() - 0.5));
        const double tau = 0.03 + 0.9 * rng.uniform();
        const double sigma = 0.08 + 0.5 * rng.uniform();
        const double rate = 0.10 * rng.uniform();
        const OptionType type = rng.uniform() < 0.5 ? OptionType::Put : OptionType::Call;
        const double am = baw_price(F, X, tau, sigma, rate, type);
        const double eu = black76_price(F, X, tau, sigma, std::exp(-rate * tau), type);
        CHECK(am >= eu - 1e-8 * (1.0 + eu));
        const double intrinsic = type == OptionType::Call ? std::max(F - X, 0.0) : std::max(X - F, 0.0);
        CHECK(am >= intrinsic - 1e-8 * (1.0 + intrinsic));
    }
}

TEST_CASE("implied vol inversion round trip") {
    const Date qd = days_from_civil(2005, 3, 1);
    // single frozen case
    {
        const double price = baw_price(80, 85, 40.0 / 365.0, 0.3, 0.04, OptionType::Call);
        const OptionQuote q = make_quote(qd, 40, 85, OptionType::Call, price, 80, 0.04);
        CHECK(invert_baw_iv(q) == doctest::Approx(0.3).epsilon(1e-5));
    }
    // random grid, strikes within 2 sd so vega stays meaningful
    Rng rng(3);
    for (int i = 0; i < 150; ++i) {
        const double F = 30.0 + 120.0 * rng.uniform();
        const double sigma = 0.10 + 0.5 * rng.uniform();
        const int dte = 15 + static_cast<int>(rng.uniform_int(170));
        const double tau = dte / 365.0;
        const double k = (rng.uniform() - 0.5) * 2.0 * sigma * std::sqrt(tau);
        const double X = F * std::exp(k);
        const double rate = 0.08 * rng.uniform();
        const OptionType type = k < 0 ? OptionType::Put : OptionType::Call;
        const double price = baw_price(F, X, tau, sigma, rate, type);
        if (price < 0.05) continue;
        const OptionQuote q = make_quote(qd, dte, X, type, price, F, rate);
        CHECK(invert_baw_iv(q) == doctest::Approx(sigma).epsilon(2e-5));
    }

    // price below intrinsic cannot be inverted
    OptionQuote bad = make_quote(qd, 40, 100, OptionType::Put, 5.0, 80.0, 0.03);
    CHECK_THROWS_AS(invert_baw_iv(bad), NoBracket);

    // monotonicity: higher price, higher implied vol
    const double p1 = baw_price(100, 100, 0.2, 0.2, 0.02, OptionType::Call);
    OptionQuote qa = make_quote(qd, 73, 100, OptionType::Call, p1, 100, 0.02);
    OptionQuote qb = qa;
    qb.price = p1 * 1.2;
    CHECK(invert_baw_iv(qb) > invert_baw_iv(qa));
}

TEST_CASE("smile construction") {
    const Date qd = days_from_civil(2005, 3, 1);
    const double F = 70.0, sigma = 0.3, rate = 0.03;
    const auto quotes = flat_smile_quotes(qd, 30, F, sigma, rate);
    REQUIRE(quotes.size() >= 4);
    SmileBuildReport report;
    const SmileGrid grid = build_smile(quotes, {}, &report);
    CHECK(grid.moneyness.size() == 2001);
    for (const double v : grid.iv) CHECK(v == doctest::Approx(sigma).epsilon(2e-4));

    // two-point smile: endpoints equal the nearest quotes, interior is linear
    const double tau = 30.0 / 365.0;
    std::vector<OptionQuote> two = {
        make_quote(qd, 30, F * std::exp(-0.05), OptionType::Put,
                   baw_price(F, F * std::exp(-0.05), tau, 0.25, rate, OptionType::Put), F, rate),
        make_quote(qd, 30, F * std::exp(0.05), OptionType::Call,
                   baw_price(F, F * std::exp(0.05), tau, 0.35, rate, OptionType::Call), F, rate)};
    const SmileGrid g2 = build_smile(two);
    CHECK(g2.iv.front() == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(g2.iv.back() == doctest::Approx(0.35).epsilon(1e-3));
    // linear blend at k = 0: midpoint of the two implied vols
    const std::size_t mid = g2.iv.size() / 2;
    CHECK(g2.iv[mid] == doctest::Approx(0.30).epsilon(2e-3));

    CHECK_THROWS_AS(build_smile({two[0]}), TooFewQuotes);
}

TEST_CASE("variance swap synthesis recovers flat-smile variance") {
    SmileGrid smile;
    smile.F = 70.0;
    smile.tau = 30.0 / 365.0;
    const double sigma = 0.2;
    const double span = 10.0 * sigma * std::sqrt(smile.tau);
    const int n = 2001;
    for (int i = 0; i < n; ++i) {
        smile.moneyness.push_back(-span + 2.0 * span * i / (n - 1));
        smile.iv.push_back(sigma);
    }
    const TermPoint tp = synth_variance_swap(smile, std::exp(-0.03 * smile.tau));
    CHECK(tp.imv == doctest::Approx(sigma * sigma).epsilon(0.01));

    // doubled vol quadruples the swap rate
    SmileGrid smile2 = smile;
    for (auto& v : smile2.iv) v = 2.0 * sigma;
    for (auto& k : smile2.moneyness) k *= 2.0;
    const TermPoint tp2 = synth_variance_swap(smile2, std::exp(-0.03 * smile.tau));
    CHECK(tp2.imv == doctest::Approx(4.0 * tp.imv).epsilon(0.01));

    // grid-resolution convergence: doubling density moves the result < 0.1%
    SmileGrid dense;
    dense.F = smile.F;
    dense.tau = smile.tau;
    for (int i = 0; i < 2 * n; ++i) {
        dense.moneyness.push_back(-span + 2.0 * span * i / (2.0 * n - 1));
        dense.iv.push_back(sigma);
    }
    const TermPoint tpd = synth_variance_swap(dense, std::exp(-0.03 * smile.tau));
    CHECK(std::fabs(tpd.imv - tp.imv) / tpd.imv < 0.001);

    // vanishing option prices give zero variance
    SmileGrid tiny = smile;
    for (auto& v : tiny.iv) v = 1e-8;
    CHECK(synth_variance_swap(tiny, 1.0).imv < 1e-10);
}

TEST_CASE("30-day maturity interpolation") {
    const Date qd = days_from_civil(2005, 3, 1);
    TermPoint p1, p2;
    p1.expiry = qd + 20;
    p1.imv = 0.05;
    p2.expiry = qd + 40;
    p2.imv = 0.05;
    CHECK(interp_30d(p1, p2, qd) == doctest::Approx(0.05).epsilon(1e-12));

    p2.imv = 0.08;
    p1.expiry = qd + 30;
    CHECK(interp_30d(p1, p2, qd) == doctest::Approx(p1.imv).epsilon(1e-12));

    TermPoint same = p1;
    CHECK_THROWS_AS(interp_30d(p1, same, qd + 5), NoBracketingMaturities);
}

TEST_CASE("quote cleaning reasons") {
    const Date qd = days_from_civil(2005, 3, 1);
    std::vector<OptionQuote> raw = {
        make_quote(qd, 5, 70, OptionType::Call, 1.0, 70, 0.03),    // too close to expiry
        make_quote(qd, 30, 90, OptionType::Call, 0.03, 70, 0.03),  // below the price floor
        make_quote(qd, 30, 100, OptionType::Put, 20.0, 70, 0.03),  // below intrinsic (30)
        make_quote(qd, 30, 72, OptionType::Call, 1.5, 70, 0.03),   // fine
    };
    const CleanResult r = clean_quotes(raw);
    REQUIRE(r.kept.size() == 1);
    REQUIRE(r.dropped.size() == 3);
    CHECK(r.dropped[0].reason == "maturity");
    CHECK(r.dropped[1].reason == "price floor");
    CHECK(r.dropped[2].reason == "arbitrage bound");
}

TEST_CASE("daily pipeline on synthetic flat smiles") {
    const Date qd = days_from_civil(2005, 3, 1);
    const double sigma = 0.25, rate = 0.03;
    std::vector<OptionQuote> quotes;
    for (const int dte : {25, 55}) {
        const auto batch = flat_smile_quotes(qd, dte, 70.0, sigma, rate, 8);
        quotes.insert(quotes.end(), batch.begin(), batch.end());
    }
    std::vector<std::string> warnings;
    const auto series = compute_impvol_series(quotes, {}, &warnings);
    REQUIRE(series.size() == 1);
    CHECK(!series[0].single_expiry);
    CHECK(series[0].iv_30d == doctest::Approx(sigma).epsilon(0.01));

    // single-expiry day falls back to the nearest maturity and is flagged
    const auto single = flat_smile_quotes(qd, 25, 70.0, sigma, rate, 8);
    const auto series1 = compute_impvol_series(single, {}, &warnings);
    REQUIRE(series1.size() == 1);
    CHECK(series1[0].single_expiry);

    PipelineOptions strict;
    strict.allow_single_expiry = false;
    CHECK_THROWS_AS(compute_impvol_series(single, strict, nullptr), NoValidDays);
}
