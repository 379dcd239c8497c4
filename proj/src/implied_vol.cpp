#include "qrv/implied_vol.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qrv/csv.hpp"
#include "qrv/errors.hpp"
#include "qrv/stats.hpp"

namespace qrv::iv {

double OptionQuote::discount() const { return std::exp(-rate * tau()); }

double black76_price(double F, double X, double tau, double sigma, double discount,
                     OptionType type) {
    if (!(F > 0.0) || !(X > 0.0)) throw DataError("black76: F and X must be positive");
    if (!(discount > 0.0 && discount <= 1.0 + 1e-12)) throw DataError("black76: bad discount");
    const double intrinsic = type == OptionType::Call ? std::max(F - X, 0.0) : std::max(X - F, 0.0);
    if (tau <= 0.0 || sigma <= 0.0) return discount * intrinsic;
    const double st = sigma * std::sqrt(tau);
    const double d1 = (std::log(F / X) + 0.5 * sigma * sigma * tau) / st;
    const double d2 = d1 - st;
    if (type == OptionType::Call)
        return discount * (F * stats::norm_cdf(d1) - X * stats::norm_cdf(d2));
    return discount * (X * stats::norm_cdf(-d2) - F * stats::norm_cdf(-d1));
}

namespace {

double d1_of(double F, double X, double tau, double sigma) {
    return (std::log(F / X) + 0.5 * sigma * sigma * tau) / (sigma * std::sqrt(tau));
}

// Critical futures price for the quadratic approximation, safeguarded
// Newton (numerical derivative) with a bisection fallback.
double critical_price(double X, double tau, double sigma, double rate, double q, OptionType type) {
    const double disc = std::exp(-rate * tau);
    auto g = [&](double F) {
        if (type == OptionType::Call) {
            const double c = black76_price(F, X, tau, sigma, disc, OptionType::Call);
            return F - X - c - (1.0 - disc * stats::norm_cdf(d1_of(F, X, tau, sigma))) * F / q;
        }
        const double p = black76_price(F, X, tau, sigma, disc, OptionType::Put);
        return X - F - p + (1.0 - disc * stats::norm_cdf(-d1_of(F, X, tau, sigma))) * F / q;
    };

    // bracket the root (g increases in F for calls, decreases for puts)
    double lo = X, hi = X;
    int guard = 0;
    if (type == OptionType::Call) {
        while (g(lo) > 0.0 && ++guard < 200) lo *= 0.5;
        guard = 0;
        while (g(hi) < 0.0 && ++guard < 200) hi *= 2.0;
    } else {
        while (g(lo) < 0.0 && ++guard < 200) lo *= 0.5;
        guard = 0;
        while (g(hi) > 0.0 && ++guard < 200) hi *= 2.0;
    }
    if (guard >= 200) throw RootFailure("baw: cannot bracket the critical futures price");

    double glo = g(lo), ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if (glo * ghi > 0.0) throw RootFailure("baw: critical price not bracketed");

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double gx = g(x);
        if (std::fabs(gx) < 1e-10 * (1.0 + X)) return x;
        // numerical Newton step
        const double h = 1e-6 * (1.0 + std::fabs(x));
        const double deriv = (g(x + h) - g(x - h)) / (2.0 * h);
        double x_new = deriv != 0.0 ? x - gx / deriv : x;
        // keep the bracket
        if (gx * glo < 0.0) {
            hi = x;
            ghi = gx;
        } else {
            lo = x;
            glo = gx;
        }
        if (!(x_new > std::min(lo, hi) && x_new < std::max(lo, hi))) x_new = 0.5 * (lo + hi);
        if (std::fabs(x_new - x) < 1e-12 * (1.0 + std::fabs(x))) return x_new;
        x = x_new;
    }
    return x;
}

}  // namespace

double baw_price(double F, double X, double tau, double sigma, double rate, OptionType type) {
    if (!(F > 0.0) || !(X > 0.0)) throw DataError("baw: F and X must be positive");
    const double disc = std::exp(-rate * tau);
    const double euro = black76_price(F, X, tau, sigma, disc, type);
    if (tau <= 0.0 || sigma <= 0.0)
        return std::max(euro, type == OptionType::Call ? F - X : X - F);
    const double K = 1.0 - disc;
    if (K <= 0.0) return euro;  // zero rate: early exercise is worthless

    const double M = 2.0 * rate / (sigma * sigma);
    const double root = std::sqrt(1.0 + 4.0 * M / K);
    if (type == OptionType::Call) {
        const double q2 = 0.5 * (1.0 + root);
        const double fstar = critical_price(X, tau, sigma, rate, q2, OptionType::Call);
        if (F >= fstar) return F - X;
        const double a2 =
            (fstar / q2) * (1.0 - disc * stats::norm_cdf(d1_of(fstar, X, tau, sigma)));
        return euro + a2 * std::pow(F / fstar, q2);
    }
    const double q1 = 0.5 * (1.0 - root);
    const double fstar = critical_price(X, tau, sigma, rate, q1, OptionType::Put);
    if (F <= fstar) return X - F;
    const double a1 = -(fstar / q1) * (1.0 - disc * stats::norm_cdf(-d1_of(fstar, X, tau, sigma)));
    return euro + a1 * std::pow(F / fstar, q1);
}

double invert_baw_iv(const OptionQuote& quote) {
    const double tau = quote.tau();
    if (tau <= 0.0) throw NoBracket("inversion needs positive time to expiry");
    auto f = [&](double sigma) {
        return baw_price(quote.futures_price, quote.strike, tau, sigma, quote.rate, quote.type) -
               quote.price;
    };
    double lo = 1e-4, hi = 5.0;
    double flo = f(lo), fhi = f(hi);
    if (flo > 0.0 || fhi < 0.0)
        throw NoBracket("quote price outside the attainable BAW range");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::fabs(fm) < 1e-8 || (hi - lo) < 1e-12) return mid;
        if (fm < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

SmileGrid build_smile(const std::vector<OptionQuote>& quotes, const SmileOptions& opts,
                      SmileBuildReport* report) {
    if (quotes.size() < 2) throw TooFewQuotes("smile needs at least 2 quotes");
    const Date expiry = quotes.front().expiry;
    const double F = quotes.front().futures_price;
    const double tau = quotes.front().tau();
    for (const auto& q : quotes) {
        if (q.expiry != expiry || q.quote_date != quotes.front().quote_date)
            throw DataError("build_smile: quotes must share quote date and expiry");
    }

    // OTM side only: puts below the future, calls at or above
    std::vector<std::pair<double, double>> k_iv;
    for (const auto& q : quotes) {
        const bool otm = q.type == OptionType::Put ? q.strike < F : q.strike >= F;
        if (!otm) continue;
        try {
            const double sigma = invert_baw_iv(q);
            k_iv.emplace_back(std::log(q.strike / F), sigma);
        } catch (const NoBracket& e) {
            if (report)
                report->dropped.push_back("strike " + csv::format_double(q.strike) + ": " + e.what());
        }
    }
    std::sort(k_iv.begin(), k_iv.end());
    // collapse duplicate moneyness (keep mean IV)
    std::vector<std::pair<double, double>> uniq;
    for (const auto& kv : k_iv) {
        if (!uniq.empty() && std::fabs(uniq.back().first - kv.first) < 1e-12)
            uniq.back().second = 0.5 * (uniq.back().second + kv.second);
        else
            uniq.push_back(kv);
    }
    if (uniq.size() < 2) throw TooFewQuotes("fewer than 2 usable out-of-the-money quotes");
    if (report) report->used_quotes = uniq.size();

    auto interp = [&](double k) {
        if (k <= uniq.front().first) return uniq.front().second;  // flat extrapolation
        if (k >= uniq.back().first) return uniq.back().second;
        const auto it = std::lower_bound(uniq.begin(), uniq.end(), k,
                                         [](const auto& p, double key) { return p.first < key; });
        const auto prev = it - 1;
        const double w = (k - prev->first) / (it->first - prev->first);
        return (1.0 - w) * prev->second + w * it->second;
    };

    const double sigma_atm = interp(0.0);
    const double span = opts.span_std_devs * sigma_atm * std::sqrt(tau);
    SmileGrid grid;
    grid.expiry = expiry;
    grid.F = F;
    grid.tau = tau;
    grid.moneyness.resize(static_cast<std::size_t>(opts.grid_points));
    grid.iv.resize(grid.moneyness.size());
    const double step = 2.0 * span / static_cast<double>(opts.grid_points - 1);
    for (std::size_t i = 0; i < grid.moneyness.size(); ++i) {
        const double k = -span + static_cast<double>(i) * step;
        grid.moneyness[i] = k;
        grid.iv[i] = interp(k);
    }
    return grid;
}

TermPoint synth_variance_swap(const SmileGrid& smile, double discount) {
    if (smile.moneyness.size() < 2) throw DataError("variance swap needs a populated smile");
    const double F = smile.F, tau = smile.tau;
    const std::size_t n = smile.moneyness.size();
    std::vector<double> strike(n), integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        strike[i] = F * std::exp(smile.moneyness[i]);
        const OptionType type = strike[i] < F ? OptionType::Put : OptionType::Call;
        const double px = black76_price(F, strike[i], tau, smile.iv[i], discount, type);
        integrand[i] = px / (strike[i] * strike[i]);
    }
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        integral += 0.5 * (integrand[i] + integrand[i + 1]) * (strike[i + 1] - strike[i]);
    TermPoint tp;
    tp.expiry = smile.expiry;
    tp.discount = discount;
    tp.tau = tau;
    tp.imv = 2.0 / (discount * tau) * integral;
    return tp;
}

double interp_30d(const TermPoint& p1, const TermPoint& p2, Date quote_date) {
    const double t1 = static_cast<double>(p1.expiry - quote_date);
    const double t2 = static_cast<double>(p2.expiry - quote_date);
    const double ts = 30.0;
    if (t1 == t2) {
        if (t1 == ts) return p1.imv;
        throw NoBracketingMaturities("interp_30d: maturities coincide");
    }
    return (p1.imv * t1 * (t2 - ts) + p2.imv * t2 * (ts - t1)) / (ts * (t2 - t1));
}

CleanResult clean_quotes(const std::vector<OptionQuote>& raw) {
    CleanResult out;
    for (const auto& q : raw) {
        const int days = q.expiry - q.quote_date;
        if (days < 10) {
            out.dropped.push_back({q, "maturity"});
            continue;
        }
        if (q.price < 0.05) {
            out.dropped.push_back({q, "price floor"});
            continue;
        }
        const double intrinsic = q.type == OptionType::Call ? std::max(q.futures_price - q.strike, 0.0)
                                                            : std::max(q.strike - q.futures_price, 0.0);
        const double upper = q.type == OptionType::Call ? q.futures_price : q.strike;
        if (q.price < intrinsic || q.price > upper) {
            out.dropped.push_back({q, "arbitrage bound"});
            continue;
        }
        out.kept.push_back(q);
    }
    return out;
}

std::vector<ImvPoint> compute_impvol_series(const std::vector<OptionQuote>& quotes,
                                            const PipelineOptions& opts,
                                            std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& m) {
        if (warnings) warnings->push_back(m);
    };
    const CleanResult cleaned = clean_quotes(quotes);
    std::map<Date, std::map<Date, std::vector<OptionQuote>>> by_day_expiry;
    for (const auto& q : cleaned.kept) by_day_expiry[q.quote_date][q.expiry].push_back(q);
    if (by_day_expiry.empty()) throw NoValidDays("no quotes survive cleaning");

    std::vector<ImvPoint> series;
    for (const auto& [day, expiries] : by_day_expiry) {
        std::vector<TermPoint> points;
        for (const auto& [expiry, qs] : expiries) {
            if (points.size() >= 2) break;  // two nearest maturities suffice
            try {
                const SmileGrid smile = build_smile(qs, opts.smile);
                points.push_back(synth_variance_swap(smile, qs.front().discount()));
            } catch (const Error& e) {
                warn(format_date(day) + " expiry " + format_date(expiry) + ": " + e.what());
            }
        }
        ImvPoint pt;
        pt.day = day;
        if (points.size() >= 2) {
            pt.imv_30d = interp_30d(points[0], points[1], day);
        } else if (points.size() == 1 && opts.allow_single_expiry) {
            pt.imv_30d = points[0].imv;
            pt.single_expiry = true;
            warn(format_date(day) + ": single expiry, nearest-maturity fallback");
        } else {
            warn(format_date(day) + ": no usable expiries, day skipped");
            continue;
        }
        pt.imv_30d = std::max(pt.imv_30d, 0.0);
        pt.iv_30d = std::sqrt(pt.imv_30d);
        series.push_back(pt);
    }
    if (series.empty()) throw NoValidDays("implied vol series is empty");
    return series;
}

namespace {

double interp_rate(const std::vector<std::pair<double, double>>& curve, double days) {
    if (curve.empty()) throw DataError("empty zero curve");
    if (days <= curve.front().first) return curve.front().second;
    if (days >= curve.back().first) return curve.back().second;
    const auto it = std::lower_bound(curve.begin(), curve.end(), days,
                                     [](const auto& p, double key) { return p.first < key; });
    const auto prev = it - 1;
    const double w = (days - prev->first) / (it->first - prev->first);
    return (1.0 - w) * prev->second + w * it->second;
}

}  // namespace

std::vector<OptionQuote> read_quotes_csv(const std::string& quotes_path,
                                         const std::string& rates_path) {
    // zero curve: date, days, rate
    const csv::Table rt = csv::read_file(rates_path);
    const std::size_t rd = rt.require_column("date", rates_path);
    const std::size_t rdays = rt.require_column("days", rates_path);
    const std::size_t rr = rt.require_column("rate", rates_path);
    std::map<Date, std::vector<std::pair<double, double>>> curves;
    for (const auto& row : rt.rows) {
        const auto d = parse_date(row[rd]);
        if (!d) throw DataError("bad date in " + rates_path);
        curves[*d].emplace_back(std::stod(row[rdays]), std::stod(row[rr]));
    }
    for (auto& [d, c] : curves) std::sort(c.begin(), c.end());

    const csv::Table qt = csv::read_file(quotes_path);
    const std::size_t cd = qt.require_column("date", quotes_path);
    const std::size_t ce = qt.require_column("expiry", quotes_path);
    const std::size_t cs = qt.require_column("strike", quotes_path);
    const std::size_t cf = qt.require_column("cp_flag", quotes_path);
    const std::size_t cp = qt.require_column("settle_price", quotes_path);
    const std::size_t cfp = qt.require_column("futures_price", quotes_path);
    const int cfe = qt.column("future_expiry");

    std::vector<OptionQuote> out;
    for (const auto& row : qt.rows) {
        OptionQuote q;
        const auto d = parse_date(row[cd]);
        const auto e = parse_date(row[ce]);
        if (!d || !e) throw DataError("bad date/expiry in " + quotes_path);
        q.quote_date = *d;
        q.expiry = *e;
        q.underlying_future_expiry = q.expiry;
        if (cfe >= 0) {
            const auto fe = parse_date(row[static_cast<std::size_t>(cfe)]);
            if (fe) q.underlying_future_expiry = *fe;
        }
        q.strike = std::stod(row[cs]);
        const std::string& flag = row[cf];
        if (flag == "P" || flag == "p" || flag == "put") q.type = OptionType::Put;
        else if (flag == "C" || flag == "c" || flag == "call") q.type = OptionType::Call;
        else throw DataError("bad cp_flag '" + flag + "' in " + quotes_path);
        q.price = std::stod(row[cp]);
        q.futures_price = std::stod(row[cfp]);
        if (!(q.strike > 0.0) || !(q.futures_price > 0.0))
            throw DataError("non-positive strike/futures price in " + quotes_path);
        const auto curve = curves.find(q.quote_date);
        if (curve == curves.end())
            throw DataError("zero curve missing date " + format_date(q.quote_date));
        q.rate = interp_rate(curve->second, static_cast<double>(q.expiry - q.quote_date));
        out.push_back(q);
    }
    if (out.empty()) throw EmptyFile("no quotes in " + quotes_path);
    return out;
}

void write_impvol_csv(const std::string& path, const std::vector<ImvPoint>& series) {
    csv::Writer w({"date", "imv_30d", "iv_30d"});
    for (const auto& p : series)
        w.add_row({format_date(p.day), csv::format_double(p.imv_30d), csv::format_double(p.iv_30d)});
    w.write(path);
}

std::vector<std::pair<Date, double>> read_impvol_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    const std::size_t cd = t.require_column("date", path);
    int cv = t.column("iv_30d");
    if (cv < 0) cv = static_cast<int>(t.require_column("value", path));
    std::vector<std::pair<Date, double>> out;
    for (const auto& row : t.rows) {
        const auto d = parse_date(row[cd]);
        if (!d) throw DataError("bad date in " + path);
        out.emplace_back(*d, std::stod(row[static_cast<std::size_t>(cv)]));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace qrv::iv
