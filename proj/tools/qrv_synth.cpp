// Generates a deterministic synthetic dataset (ticks, implied-vol series,
// option quotes, zero curve, run config) for demos and end-to-end tests.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "qrv/csv.hpp"
#include "qrv/implied_vol.hpp"
#include "qrv/rng.hpp"
#include "qrv/timeutil.hpp"

using namespace qrv;

namespace {

bool is_weekend(Date d) {
    const int w = weekday(d);
    return w == 0 || w == 6;
}

struct DayState {
    double log_sigma2 = 0.0;  // log daily variance (percent^2)
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic futures dataset generator"};
    std::string out_dir = "data";
    int days = 2600;
    std::uint64_t seed = 20010902;
    int bars = 78;  // 5-minute bars over 09:30-16:00
    bool with_options = true;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--days", days, "number of trading days");
    app.add_option("--seed", seed, "rng seed");
    app.add_flag("--with-options,!--no-options", with_options, "emit option quotes and rates");
    CLI11_PARSE(app, argc, argv);

    std::filesystem::create_directories(out_dir);
    Rng rng(seed);

    // trading calendar: business days from 2001-01-02
    std::vector<Date> calendar;
    Date d = days_from_civil(2001, 1, 2);
    while (static_cast<int>(calendar.size()) < days) {
        if (!is_weekend(d)) calendar.push_back(d);
        ++d;
    }

    // log-variance follows a persistent AR(1) with a Wednesday bump; days
    // occasionally carry one jump bar
    DayState st;
    st.log_sigma2 = 0.0;
    std::ofstream ticks(std::filesystem::path(out_dir) / "ticks.csv", std::ios::binary);
    ticks << "timestamp,price\n";
    std::vector<double> daily_rv_sqrt(calendar.size());
    double log_price = 100.0 * std::log(1200.0);
    const std::int64_t open_ms = 9 * 3600000 + 30 * 60000;
    const std::int64_t bar_ms = 5 * 60000;
    char buf[64];
    for (std::size_t day = 0; day < calendar.size(); ++day) {
        st.log_sigma2 = 0.975 * st.log_sigma2 + 0.18 * rng.normal();
        double sigma2 = std::exp(st.log_sigma2);  // mean daily variance ~ 1 (percent^2)
        if (weekday(calendar[day]) == 3) sigma2 *= 1.35;
        const bool jump_day = rng.uniform() < 0.02;
        const int jump_bar = jump_day ? static_cast<int>(rng.uniform_int(bars)) : -1;

        const std::int64_t day_ms = static_cast<std::int64_t>(calendar[day]) * kMsPerDay;
        double rv = 0.0;
        // opening tick
        std::snprintf(buf, sizeof(buf), "%s,%.6f\n", format_timestamp(day_ms + open_ms).c_str(),
                      std::exp(log_price / 100.0));
        ticks << buf;
        for (int b = 0; b < bars; ++b) {
            double ret = std::sqrt(sigma2 / bars) * rng.normal();
            if (b == jump_bar) ret += (rng.uniform() < 0.5 ? -1.0 : 1.0) * (8.0 + 4.0 * rng.uniform()) *
                                      std::sqrt(sigma2 / bars);
            log_price += ret;
            rv += ret * ret;
            // a few interior ticks plus the bar-close tick
            const int extra = 1 + static_cast<int>(rng.uniform_int(2));
            for (int e = 0; e < extra; ++e) {
                const std::int64_t ts = day_ms + open_ms + b * bar_ms +
                                        static_cast<std::int64_t>(rng.uniform_int(bar_ms - 1000)) + 500;
                const double wiggle = 0.02 * rng.normal();
                std::snprintf(buf, sizeof(buf), "%s,%.6f\n", format_timestamp(ts).c_str(),
                              std::exp((log_price + wiggle) / 100.0));
                ticks << buf;
            }
            std::snprintf(buf, sizeof(buf), "%s,%.6f\n",
                          format_timestamp(day_ms + open_ms + (b + 1) * bar_ms).c_str(),
                          std::exp(log_price / 100.0));
            ticks << buf;
        }
        daily_rv_sqrt[day] = std::sqrt(rv);
    }
    ticks.close();

    // implied-vol proxy: smoothed realized volatility plus a premium
    {
        csv::Writer w({"date", "iv_30d"});
        double ewma = 1.0;
        for (std::size_t day = 0; day < calendar.size(); ++day) {
            ewma = 0.94 * ewma + 0.06 * daily_rv_sqrt[day] * daily_rv_sqrt[day];
            const double iv = 1.15 * std::sqrt(ewma) + 0.05 * rng.uniform();
            w.add_row({format_date(calendar[day]), csv::format_double(iv)});
        }
        w.write((std::filesystem::path(out_dir) / "impvol.csv").string());
    }

    if (with_options) {
        // quotes: every 5th day, two expiries, BAW-consistent prices on a skewed smile
        csv::Writer qw({"date", "expiry", "strike", "cp_flag", "settle_price", "futures_price"});
        csv::Writer rw({"date", "days", "rate"});
        for (std::size_t day = 0; day + 60 < calendar.size(); day += 5) {
            const Date t = calendar[day];
            const double F = 60.0 + 10.0 * std::sin(static_cast<double>(day) / 150.0);
            const double rate = 0.03 + 0.01 * std::sin(static_cast<double>(day) / 400.0);
            rw.add_row({format_date(t), "1", csv::format_double(rate)});
            rw.add_row({format_date(t), "365", csv::format_double(rate + 0.002)});
            const double sigma0 = 0.30 + 0.05 * std::sin(static_cast<double>(day) / 90.0);
            for (const int dte : {25, 55}) {
                const Date expiry = t + dte;
                const double tau = dte / 365.0;
                const double sd = sigma0 * std::sqrt(tau);
                for (int s = -6; s <= 6; ++s) {
                    const double k = 0.5 * sd * s;
                    const double strike = F * std::exp(k);
                    const double smile_iv = sigma0 - 0.10 * k + 0.35 * k * k / (sd * 4.0);
                    const iv::OptionType type = k < 0 ? iv::OptionType::Put : iv::OptionType::Call;
                    const double price =
                        iv::baw_price(F, strike, tau, std::max(0.05, smile_iv), rate, type);
                    if (price < 0.05) continue;
                    qw.add_row({format_date(t), format_date(expiry),
                                csv::format_double(strike), type == iv::OptionType::Put ? "P" : "C",
                                csv::format_double(price), csv::format_double(F)});
                }
            }
        }
        qw.write((std::filesystem::path(out_dir) / "quotes.csv").string());
        rw.write((std::filesystem::path(out_dir) / "rates.csv").string());
    }

    // ready-to-run config
    {
        std::ofstream cfgf(std::filesystem::path(out_dir) / "qrv.conf", std::ios::binary);
        cfgf << "[paths]\n"
             << "ticks = " << out_dir << "/ticks.csv\n"
             << "quotes = " << out_dir << "/quotes.csv\n"
             << "rates = " << out_dir << "/rates.csv\n"
             << "implied_vol = " << out_dir << "/impvol.csv\n"
             << "out = " << out_dir << "/out\n\n"
             << "[session]\n"
             << "open = 09:30\nclose = 16:00\nbar_minutes = 5\nmin_ticks = 50\n\n"
             << "[measures]\njump_significance = 0.001\n\n"
             << "[models]\n"
             << "return_models = LQR1, LQR2, LQR3\n"
             << "rv_models = HARQ1, HARQ2, HARQ3\n"
             << "caviar_forms = SAV, AS\n"
             << "benchmark_return = LQR2\nbenchmark_rv = HARQ3\n\n"
             << "[run]\n"
             << "alphas = 0.05, 0.1, 0.5, 0.9, 0.95\n"
             << "horizons = 1, 5\n"
             << "window = 1000\n"
             << "n_oos = 300\n"
             << "seed = 42\n"
             << "mc_reps = 999\n"
             << "bootstrap_reps = 499\n"
             << "caviar_starts = 2000\n"
             << "caviar_polish = 5\n"
             << "arfima_draws = 2000\n"
             << "refit_every = 25\n";
    }

    std::cout << "wrote synthetic dataset to " << out_dir << " (" << days << " days)\n";
    return 0;
}
