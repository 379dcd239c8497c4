// Acceptance suite: runs every release criterion at its pinned tolerance and
// prints one pass/fail line per criterion. Exit status is the failure count.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qrv/arfima.hpp"
#include "qrv/caviar.hpp"
#include "qrv/evaluation.hpp"
#include "qrv/implied_vol.hpp"
#include "qrv/qr.hpp"
#include "qrv/realized.hpp"
#include "qrv/rng.hpp"
#include "qrv/stats.hpp"
#include "support/qr_oracle.hpp"

using namespace qrv;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const std::string& what, const std::string& detail) {
    std::printf("CRITERION %2d: %s - %s (%s)\n", idx, pass ? "PASS" : "FAIL", what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> brownian_day(Rng& rng, int m, double sigma2 = 1.0) {
    std::vector<double> r(static_cast<std::size_t>(m));
    const double sd = std::sqrt(sigma2 / m);
    for (auto& v : r) v = sd * rng.normal();
    return r;
}

// ---- criterion 1: interior point vs LP oracle ----
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    int bad = 0;
    double worst = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t n = 30 + rng.uniform_int(171);           // <= 200
        const std::size_t p_extra = rng.uniform_int(5);            // p <= 5 incl intercept
        const double alpha = 0.05 + 0.9 * rng.uniform();
        qr::Dataset d;
        d.y.resize(static_cast<Eigen::Index>(n));
        d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(1 + p_extra));
        for (std::size_t i = 0; i < n; ++i) {
            d.x(static_cast<Eigen::Index>(i), 0) = 1.0;
            double mean = 0.2;
            for (std::size_t j = 0; j < p_extra; ++j) {
                const double v = rng.normal();
                d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(1 + j)) = v;
                mean += 0.4 * v;
            }
            d.y[static_cast<Eigen::Index>(i)] = mean + rng.normal();
        }
        const qr::QuantileFit fit = qr::fit_lqr(d, alpha);
        const qrv_test::OracleResult oracle = qrv_test::qr_lp_oracle(d.x, d.y, alpha);
        const double gap = std::fabs(fit.objective - oracle.objective);
        worst = std::max(worst, gap);
        if (!oracle.certified || gap > 1e-6) ++bad;
    }
    const double secs = elapsed_s(t0);
    char detail[128];
    std::snprintf(detail, sizeof(detail), "200 instances, worst gap %.2e, %.1f s", worst, secs);
    report(1, bad == 0 && secs < 10.0, "check-loss objective matches the LP oracle within 1e-6",
           detail);
}

// ---- criterion 2: out-of-sample quantile calibration ----
void criterion_2() {
    // fit on all but the last 500 observations and forecast those 500, the
    // standard out-of-sample arrangement for this kind of calibration check
    Rng rng(223);
    const std::size_t n = 5000, train = 4500;
    std::vector<double> v(n), y(n);
    double state = 3.39;  // stationary mean of the volatility state
    for (std::size_t t = 0; t < n; ++t) {
        state = 0.1 + 0.9 * state + 0.3 * std::fabs(rng.normal());
        v[t] = state;
        y[t] = 0.1 - 0.2 * v[t] + (0.2 + 0.8 * v[t]) * rng.normal();
    }
    qr::Dataset d;
    d.y.resize(static_cast<Eigen::Index>(train));
    d.x.resize(static_cast<Eigen::Index>(train), 2);
    for (std::size_t t = 0; t < train; ++t) {
        d.x(static_cast<Eigen::Index>(t), 0) = 1.0;
        d.x(static_cast<Eigen::Index>(t), 1) = v[t];
        d.y[static_cast<Eigen::Index>(t)] = y[t];
    }
    bool pass = true;
    std::ostringstream detail;
    for (const double alpha : {0.05, 0.10, 0.50, 0.90, 0.95}) {
        const qr::QuantileFit fit = qr::fit_lqr(d, alpha);
        std::size_t hits = 0;
        for (std::size_t t = train; t < n; ++t) {
            const double q = fit.beta[0] + fit.beta[1] * v[t];
            hits += y[t] <= q ? 1 : 0;
        }
        const double cov = static_cast<double>(hits) / static_cast<double>(n - train);
        const double se = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n - train));
        if (std::fabs(cov - alpha) > 2.0 * se) pass = false;
        detail << alpha << ":" << cov << " ";
    }
    report(2, pass, "location-scale coverage within 2 MC std errors at every alpha", detail.str());
}

// ---- criterion 3: jump test size and power ----
void criterion_3() {
    Rng rng(303);
    const int m = 390, days = 100000;
    const double crit = stats::norm_quantile(0.999);
    int rejections = 0;
    for (int d = 0; d < days; ++d) {
        const auto day = brownian_day(rng, m);
        const double rv = rm::realized_variance(day);
        if (rv == 0.0) continue;
        const double z = rm::jump_test_z(rv, rm::med_rv(day), rm::med_rq(day), m);
        rejections += z > crit ? 1 : 0;
    }
    const double size = static_cast<double>(rejections) / days;

    // power: a jump worth 10 daily standard deviations landing inside one bar
    int power_hits = 0;
    const int jump_days = 2000;
    for (int d = 0; d < jump_days; ++d) {
        auto day = brownian_day(rng, m);
        day[static_cast<std::size_t>(rng.uniform_int(m))] += 10.0;
        const double z = rm::jump_test_z(rm::realized_variance(day), rm::med_rv(day),
                                         rm::med_rq(day), m);
        power_hits += z > crit ? 1 : 0;
    }
    const double power = static_cast<double>(power_hits) / jump_days;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "size %.5f (target [0.0005, 0.002]), power %.4f", size,
                  power);
    report(3, size >= 0.0005 && size <= 0.002 && power >= 0.99,
           "0.1% jump test size and 10-sigma power", detail);
}

// ---- criterion 4: MedRV bias and the O(M^-1/2) error rate ----
void criterion_4() {
    Rng rng(404);
    const int days = 10000;
    double medrv_sum = 0.0;
    double se390 = 0.0, se1560 = 0.0;
    for (int d = 0; d < days; ++d) {
        // per-day variance drawn lognormally, same day at both frequencies
        const double qv = std::exp(0.4 * rng.normal());
        const auto fine = brownian_day(rng, 1560, qv);
        std::vector<double> coarse(390);
        for (int i = 0; i < 390; ++i) {
            double acc = 0.0;
            for (int j = 0; j < 4; ++j) acc += fine[static_cast<std::size_t>(4 * i + j)];
            coarse[static_cast<std::size_t>(i)] = acc;
        }
        medrv_sum += rm::med_rv(coarse) / qv;
        const double e390 = rm::realized_variance(coarse) - qv;
        const double e1560 = rm::realized_variance(fine) - qv;
        se390 += e390 * e390;
        se1560 += e1560 * e1560;
    }
    const double bias = medrv_sum / days - 1.0;
    const double ratio = std::sqrt(se1560 / days) / std::sqrt(se390 / days);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "MedRV relative bias %.4f, RMSE ratio %.3f", bias, ratio);
    report(4, std::fabs(bias) < 0.01 && ratio >= 0.35 && ratio <= 0.65,
           "MedRV consistency and measurement-error scaling", detail);
}

// ---- criterion 5: SAV CAViaR parameter recovery ----
void criterion_5() {
    const double alpha = 0.05;
    Eigen::VectorXd truth(3);
    truth << -0.10, 0.85, -0.15;
    const double za = stats::norm_quantile(alpha);
    int within[3] = {0, 0, 0};
    double worst_rep_s = 0.0;
    const int reps = 20;
    for (int rep = 0; rep < reps; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng rng(500 + static_cast<std::uint64_t>(rep));
        std::vector<double> r(5000);
        double q = truth[0] / (1.0 - truth[1]);
        r[0] = (q / za) * rng.normal();
        for (std::size_t t = 0; t + 1 < r.size(); ++t) {
            q = truth[0] + truth[1] * q + truth[2] * std::fabs(r[t]);
            r[t + 1] = (q / za) * rng.normal();
        }
        caviar::CaviarSpec spec;
        spec.form = caviar::Form::SAV;
        spec.alpha = alpha;
        caviar::FitOptions opts;
        opts.seed = 900 + static_cast<std::uint64_t>(rep);
        opts.n_starts = 2000;
        opts.n_polish = 5;
        const Eigen::MatrixXd no_exog(0, 0);
        const caviar::CaviarFit fit = caviar::fit_caviar(spec, r, no_exog, opts);
        const caviar::StdErrorTable se = caviar::caviar_std_errors(
            fit, r, no_exog, caviar::default_bandwidth_grid(fit, r, no_exog));
        const Eigen::VectorXd se_vec =
            se.selected_se ? *se.selected_se : se.std_errors[se.std_errors.size() / 2];
        for (int j = 0; j < 3; ++j)
            if (std::fabs(fit.params.beta[j] - truth[j]) <= 3.0 * se_vec[j]) ++within[j];
        worst_rep_s = std::max(worst_rep_s, elapsed_s(t0));
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "within-3se counts %d/%d/%d of %d, slowest rep %.1f s",
                  within[0], within[1], within[2], reps, worst_rep_s);
    report(5, within[0] >= 17 && within[1] >= 17 && within[2] >= 17 && worst_rep_s < 300.0,
           "SAV parameters recovered within 3 standard errors in >= 17/20 replications", detail);
}

// ---- criterion 6: ARFIMA long-memory recovery at d = 0.48 ----
void criterion_6() {
    arfima::ArfimaParams truth;
    truth.mu = -0.37;
    truth.phi = -0.07;
    truth.d = 0.48;
    truth.sigma_u2 = 0.25;
    Rng rng(606);
    const auto series = arfima::simulate_arfima(truth, 10000, 3000, rng);
    const arfima::ArfimaFit fit = arfima::fit_arfima(series);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "d-hat %.4f (truth 0.48), phi-hat %.4f", fit.params.d,
                  fit.params.phi);
    report(6, std::fabs(fit.params.d - truth.d) <= 0.05, "fractional d recovered within 0.05",
           detail);
}

// ---- criterion 7: DQ Monte Carlo p-values are uniform under the null ----
void criterion_7() {
    const int outer = 500;
    const std::size_t n = 1000;
    const double alpha = 0.05;
    // one fixed, persistent quantile path shared by all replications
    std::vector<double> path(n);
    {
        Rng rng(707);
        double level = -1.6;
        for (auto& v : path) {
            level = -1.6 + 0.95 * (level + 1.6) + 0.04 * rng.normal();
            v = level;
        }
    }
    std::vector<double> pvals(outer, 0.0);
    const int workers = 2;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int rep = w; rep < outer; rep += workers) {
                Rng rng(1000 + static_cast<std::uint64_t>(rep));
                std::vector<double> obs(n);
                for (std::size_t t = 0; t < n; ++t)
                    obs[t] = rng.bernoulli(alpha) ? path[t] - 0.1 : path[t] + 1.0;
                const eval::HitSeries hs = eval::hits(obs, path, alpha);
                eval::DQOptions opts;
                opts.mc_reps = 199;
                opts.seed = 5000 + static_cast<std::uint64_t>(rep);
                pvals[static_cast<std::size_t>(rep)] = eval::dq_test(hs, opts).p_value_mc;
            }
        });
    }
    for (auto& t : pool) t.join();
    const double ks = stats::ks_distance_uniform(pvals);
    char detail[64];
    std::snprintf(detail, sizeof(detail), "KS distance %.4f over %d replications", ks, outer);
    report(7, ks < 0.05, "DQ MC p-values uniform under the null", detail);
}

// ---- criterion 8: DM antisymmetry and size ----
void criterion_8() {
    Rng rng(808);
    std::vector<double> la(500), lb(500);
    for (std::size_t i = 0; i < la.size(); ++i) {
        la[i] = std::fabs(rng.normal());
        lb[i] = std::fabs(rng.normal());
    }
    const eval::DMResult ab = eval::dm_test(la, lb, 1);
    const eval::DMResult ba = eval::dm_test(lb, la, 1);
    const bool antisym = ab.stat == -ba.stat;

    int rejections = 0;
    const int reps = 2000;
    for (int rep = 0; rep < reps; ++rep) {
        for (std::size_t i = 0; i < la.size(); ++i) {
            la[i] = std::fabs(rng.normal());
            lb[i] = std::fabs(rng.normal());
        }
        if (eval::dm_test(la, lb, 1).p_value < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / reps;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "antisymmetry %s, size %.4f (target [0.03, 0.07])",
                  antisym ? "exact" : "BROKEN", rate);
    report(8, antisym && rate >= 0.03 && rate <= 0.07, "DM antisymmetry and finite-sample size",
           detail);
}

// ---- criterion 9: implied-volatility block ----
void criterion_9() {
    bool pass = true;
    std::ostringstream detail;

    // ATM Black-76 pin
    const double atm = iv::black76_price(100, 100, 0.25, 0.2, 1.0, iv::OptionType::Call);
    if (std::fabs(atm - 3.9878) > 5e-5) pass = false;
    detail << "atm " << atm;

    // flat-smile variance within 1%
    iv::SmileGrid smile;
    smile.F = 70.0;
    smile.tau = 30.0 / 365.0;
    const double sigma = 0.2;
    const double span = 10.0 * sigma * std::sqrt(smile.tau);
    for (int i = 0; i < 2001; ++i) {
        smile.moneyness.push_back(-span + 2.0 * span * i / 2000.0);
        smile.iv.push_back(sigma);
    }
    const double imv = iv::synth_variance_swap(smile, std::exp(-0.03 * smile.tau)).imv;
    if (std::fabs(imv - sigma * sigma) / (sigma * sigma) > 0.01) pass = false;
    detail << ", imv " << imv;

    // BAW dominates Black-76; inversion round-trips within 1e-6
    Rng rng(909);
    double worst_rt = 0.0;
    int dominated = 0;
    for (int i = 0; i < 1000; ++i) {
        const double F = 30.0 + 140.0 * rng.uniform();
        const double sig = 0.12 + 0.4 * rng.uniform();
        const int dte = 20 + static_cast<int>(rng.uniform_int(160));
        const double tau = dte / 365.0;
        const double k = (rng.uniform() - 0.5) * 3.0 * sig * std::sqrt(tau);
        const double X = F * std::exp(k);
        const double rate = 0.07 * rng.uniform();
        const iv::OptionType type = k < 0 ? iv::OptionType::Put : iv::OptionType::Call;
        const double am = iv::baw_price(F, X, tau, sig, rate, type);
        const double eu = iv::black76_price(F, X, tau, sig, std::exp(-rate * tau), type);
        if (am >= eu - 1e-8 * (1.0 + eu)) ++dominated;
        if (i < 200 && am >= 0.05) {
            iv::OptionQuote q;
            q.quote_date = days_from_civil(2005, 3, 1);
            q.expiry = q.quote_date + dte;
            q.strike = X;
            q.type = type;
            q.price = am;
            q.futures_price = F;
            q.rate = rate;
            worst_rt = std::max(worst_rt, std::fabs(iv::invert_baw_iv(q) - sig));
        }
    }
    if (dominated != 1000 || worst_rt > 1e-6) pass = false;
    detail << ", dominance " << dominated << "/1000, worst round-trip " << worst_rt;
    report(9, pass, "Black-76 pin, flat-smile variance, BAW dominance, inversion round-trip",
           detail.str());
}

// ---- criterion 10: end-to-end determinism of the bundled backtest ----
void criterion_10() {
    const char* qrv_bin = std::getenv("QRV_BIN");
    const char* synth_bin = std::getenv("QRV_SYNTH_BIN");
    if (!qrv_bin || !synth_bin) {
        report(10, false, "end-to-end backtest determinism", "QRV_BIN/QRV_SYNTH_BIN not set");
        return;
    }
    const fs::path tmp = fs::temp_directory_path() / "qrv_acceptance_e2e";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    auto shell = [](const std::string& cmd) {
        return WEXITSTATUS(std::system((cmd + " >/dev/null 2>&1").c_str()));
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const auto t0 = std::chrono::steady_clock::now();
    const std::string data_dir = (tmp / "data").string();
    bool pass = shell(std::string(synth_bin) + " --out " + data_dir) == 0;
    const std::string conf = data_dir + "/qrv.conf";
    if (pass)
        pass = shell(std::string(qrv_bin) + " backtest --config " + conf + " --out " +
                     (tmp / "run1").string()) == 0;
    if (pass)
        pass = shell(std::string(qrv_bin) + " backtest --config " + conf + " --out " +
                     (tmp / "run2").string()) == 0;
    const double secs = elapsed_s(t0);
    std::string detail = "runtime " + std::to_string(secs) + " s";
    if (pass) {
        const std::string a = slurp(tmp / "run1" / "backtest_report.csv");
        const std::string b = slurp(tmp / "run2" / "backtest_report.csv");
        const std::string aj = slurp(tmp / "run1" / "backtest_report.json");
        const std::string bj = slurp(tmp / "run2" / "backtest_report.json");
        pass = !a.empty() && a == b && !aj.empty() && aj == bj && secs < 600.0;
        detail += pass ? ", byte-identical reports" : ", reports differ or too slow";
    } else {
        detail += ", pipeline failed";
    }
    fs::remove_all(tmp);
    report(10, pass, "bundled synthetic backtest is reproducible end to end", detail);
}

}  // namespace

int main(int argc, char** argv) {
    // optional single-criterion filter for debugging: ./acceptance 7
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);
    const std::function<void()> criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                                              criterion_5, criterion_6, criterion_7, criterion_8,
                                              criterion_9, criterion_10};
    for (int i = 0; i < 10; ++i) {
        if (only != 0 && only != i + 1) continue;
        criteria[static_cast<std::size_t>(i)]();
    }
    if (g_failures == 0) std::printf("all acceptance criteria passed\n");
    else std::printf("%d acceptance criteria FAILED\n", g_failures);
    return g_failures;
}
