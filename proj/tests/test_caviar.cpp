#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qrv/caviar.hpp"
#include "qrv/errors.hpp"
#include "qrv/rng.hpp"
#include "qrv/stats.hpp"

using namespace qrv;
using namespace qrv::caviar;

namespace {

const Eigen::MatrixXd kNoExog(0, 0);

CaviarParams sav_params(double b1, double b2, double b3) {
    CaviarParams p;
    p.beta.resize(3);
    p.beta << b1, b2, b3;
    p.gamma.resize(0);
    return p;
}

// data generated so that the SAV recursion IS the true alpha-quantile:
// r_t = (q_t / z_alpha) * eps_t with eps iid standard normal
std::vector<double> simulate_sav(const CaviarParams& truth, double alpha, std::size_t n, Rng& rng) {
    const double za = stats::norm_quantile(alpha);
    std::vector<double> r(n);
    double q = truth.beta[0] / (1.0 - truth.beta[1]);  // rough stationary start
    r[0] = (q / za) * rng.normal();
    for (std::size_t t = 0; t + 1 < n; ++t) {
        q = truth.beta[0] + truth.beta[1] * q + truth.beta[2] * std::fabs(r[t]);
        r[t + 1] = (q / za) * rng.normal();
    }
    return r;
}

}  // namespace

TEST_CASE("identity and constant recursions") {
    CaviarSpec spec;
    spec.form = Form::SAV;
    spec.alpha = 0.05;
    const std::vector<double> r = {0.1, -0.2, 0.3, -0.4, 0.5};

    const PathResult ident = evaluate_quantile_path(spec, sav_params(0.0, 1.0, 0.0), r, kNoExog, -2.0);
    for (const double q : ident.q_path) CHECK(q == doctest::Approx(-2.0));

    const PathResult constant = evaluate_quantile_path(spec, sav_params(0.7, 0.0, 0.0), r, kNoExog, -2.0);
    CHECK(constant.q_path[0] == doctest::Approx(-2.0));
    for (std::size_t t = 1; t < r.size(); ++t) CHECK(constant.q_path[t] == doctest::Approx(0.7));
}

TEST_CASE("explosive recursion trips the overflow guard") {
    CaviarSpec spec;
    spec.form = Form::SAV;
    spec.alpha = 0.05;
    std::vector<double> r(4000, 0.1);
    CHECK_THROWS_AS(evaluate_quantile_path(spec, sav_params(1.0, 2.0, 0.0), r, kNoExog, 1.0),
                    ExplosivePath);
}

TEST_CASE("objective equals the recomputed mean check loss") {
    Rng rng(3);
    std::vector<double> r(500);
    for (auto& v : r) v = rng.normal();
    CaviarSpec spec;
    spec.form = Form::SAV;
    spec.alpha = 0.1;
    const CaviarParams p = sav_params(-0.05, 0.8, -0.2);
    const PathResult path = evaluate_quantile_path(spec, p, r, kNoExog, -1.0);
    double acc = 0.0;
    for (std::size_t t = 1; t < r.size(); ++t) {
        const double e = r[t] - path.q_path[t];
        acc += (spec.alpha - (e < 0 ? 1.0 : 0.0)) * e;
    }
    CHECK(std::fabs(path.objective - acc / static_cast<double>(r.size() - 1)) < 1e-12);
}

TEST_CASE("asymmetric slope with negated down coefficient equals SAV") {
    // |r| = r+ - r- under the sign convention r- = r 1{r<0}
    Rng rng(4);
    std::vector<double> r(300);
    for (auto& v : r) v = rng.normal();
    CaviarSpec sav;
    sav.form = Form::SAV;
    sav.alpha = 0.05;
    CaviarSpec as = sav;
    as.form = Form::AS;
    CaviarParams ps = sav_params(-0.1, 0.85, -0.3);
    CaviarParams pa;
    pa.beta.resize(4);
    pa.beta << -0.1, 0.85, -0.3, 0.3;
    pa.gamma.resize(0);
    const PathResult a = evaluate_quantile_path(sav, ps, r, kNoExog, -1.5);
    const PathResult b = evaluate_quantile_path(as, pa, r, kNoExog, -1.5);
    for (std::size_t t = 0; t < r.size(); ++t)
        CHECK(a.q_path[t] == doctest::Approx(b.q_path[t]).epsilon(1e-13));
}

TEST_CASE("fits are deterministic given the seed") {
    Rng rng(5);
    const CaviarParams truth = sav_params(-0.10, 0.85, -0.15);
    const std::vector<double> r = simulate_sav(truth, 0.05, 800, rng);
    CaviarSpec spec;
    spec.form = Form::SAV;
    spec.alpha = 0.05;
    FitOptions opts;
    opts.seed = 17;
    opts.n_starts = 200;
    opts.n_polish = 3;
    const CaviarFit f1 = fit_caviar(spec, r, kNoExog, opts);
    const CaviarFit f2 = fit_caviar(spec, r, kNoExog, opts);
    CHECK((f1.params.beta - f2.params.beta).cwiseAbs().maxCoeff() == 0.0);
    CHECK(f1.objective == f2.objective);

    // multi-start winner is no worse than a fresh single polished start
    FitOptions weak = opts;
    weak.seed = 91;
    weak.n_starts = 10;
    weak.n_polish = 1;
    const CaviarFit f3 = fit_caviar(spec, r, kNoExog, weak);
    CHECK(f1.objective <= f3.objective + 1e-12);
}

TEST_CASE("degenerate exogenous regressor is flagged") {
    Rng rng(6);
    const CaviarParams truth = sav_params(-0.10, 0.85, -0.15);
    const std::vector<double> r = simulate_sav(truth, 0.05, 600, rng);
    Eigen::MatrixXd exog = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r.size()), 1);
    CaviarSpec spec;
    spec.form = Form::SAV;
    spec.alpha = 0.05;
    spec.exog_labels = {"dead"};
    FitOptions opts;
    opts.seed = 2;
    opts.n_starts = 100;
    opts.n_polish = 2;
    const CaviarFit f = fit_caviar(spec, r, kNoExog.rows() == 0 ? exog : exog, opts);
    bool flagged = false;
    for (const auto& w : f.warnings) flagged |= w.find("dead") != std::string::npos;
    CHECK(flagged);
}

TEST_CASE("sav parameter recovery on simulated data") {
    Rng rng(7);
    const CaviarParams truth = sav_params(-0.10, 0.85, -0.15);
    const double alpha = 0.05;
    const std::vector<double> r = simulate_sav(truth, alpha, 5000, rng);
    CaviarSpec spec;
    spec.form = Form::SAV;
    spec.alpha = alpha;
    FitOptions opts;
    opts.seed = 23;
    opts.n_starts = 1500;
    opts.n_polish = 5;
    const CaviarFit fit = fit_caviar(spec, r, kNoExog, opts);
    const StdErrorTable se = caviar_std_errors(fit, r, kNoExog, default_bandwidth_grid(fit, r, kNoExog));
    REQUIRE(se.selected.has_value());
    for (int j = 0; j < 3; ++j) {
        const double sej = (*se.selected_se)[j];
        CHECK(std::fabs(fit.params.beta[j] - truth.beta[j]) < 3.5 * sej + 0.02);
    }
}

TEST_CASE("bandwidth table selection") {
    Rng rng(8);
    const CaviarParams truth = sav_params(-0.10, 0.85, -0.15);
    const std::vector<double> r = simulate_sav(truth, 0.05, 1500, rng);
    CaviarSpec spec;
    spec.form = Form::SAV;
    spec.alpha = 0.05;
    FitOptions opts;
    opts.seed = 3;
    opts.n_starts = 300;
    opts.n_polish = 3;
    const CaviarFit fit = fit_caviar(spec, r, kNoExog, opts);

    // single-point grid selects trivially
    const StdErrorTable one = caviar_std_errors(fit, r, kNoExog, {0.3});
    REQUIRE(one.selected.has_value());
    CHECK(*one.selected == 0);

    // wildly spread bandwidths have no stable pair
    const StdErrorTable unstable = caviar_std_errors(fit, r, kNoExog, {1e-4, 1e-1, 1e2, 1e5});
    CHECK(!unstable.selected.has_value());

    // a dense grid near the rule-of-thumb bandwidth stabilizes
    const StdErrorTable dense =
        caviar_std_errors(fit, r, kNoExog, default_bandwidth_grid(fit, r, kNoExog));
    CHECK(dense.bandwidths.size() == dense.std_errors.size());
}

TEST_CASE("confidence interval coverage across replications") {
    // 95% CIs from the sandwich standard errors should cover each true
    // parameter roughly 95% of the time
    const CaviarParams truth = sav_params(-0.10, 0.85, -0.15);
    const double alpha = 0.05;
    const int reps = 200;
    int covered[3] = {0, 0, 0};
    int usable = 0;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(1000 + static_cast<std::uint64_t>(rep));
        const std::vector<double> r = simulate_sav(truth, alpha, 1500, rng);
        CaviarSpec spec;
        spec.form = Form::SAV;
        spec.alpha = alpha;
        FitOptions opts;
        opts.seed = 40 + static_cast<std::uint64_t>(rep);
        opts.n_starts = 300;
        opts.n_polish = 2;
        opts.simplex_iterations = 300;
        opts.quasi_newton_iterations = 100;
        const CaviarFit fit = fit_caviar(spec, r, kNoExog, opts);
        const StdErrorTable se =
            caviar_std_errors(fit, r, kNoExog, default_bandwidth_grid(fit, r, kNoExog));
        if (!se.selected) continue;
        ++usable;
        for (int j = 0; j < 3; ++j) {
            const double half = 1.96 * (*se.selected_se)[j];
            if (std::fabs(fit.params.beta[j] - truth.beta[j]) <= half) ++covered[j];
        }
    }
    REQUIRE(usable > 150);
    for (int j = 0; j < 3; ++j) {
        const double cov = static_cast<double>(covered[j]) / usable;
        CHECK(cov >= 0.88);  // nominal 95%, generous finite-sample band
        CHECK(cov <= 1.0);
    }
}

TEST_CASE("fit json has seed, starts and bandwidth table") {
    Rng rng(9);
    const std::vector<double> r = simulate_sav(sav_params(-0.10, 0.85, -0.15), 0.05, 600, rng);
    CaviarSpec spec;
    spec.form = Form::SAV;
    spec.alpha = 0.05;
    FitOptions opts;
    opts.seed = 77;
    opts.n_starts = 100;
    opts.n_polish = 2;
    const CaviarFit fit = fit_caviar(spec, r, kNoExog, opts);
    const StdErrorTable se = caviar_std_errors(fit, r, kNoExog, {0.2, 0.25});
    const std::string js = fit_to_json(fit, &se);
    CHECK(js.find("\"seed\"") != std::string::npos);
    CHECK(js.find("\"starts\"") != std::string::npos);
    CHECK(js.find("\"std_error_table\"") != std::string::npos);
}
