#include "qrv/arfima.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>

#include "qrv/errors.hpp"
#include "qrv/kernels.hpp"
#include "qrv/optim.hpp"
#include "qrv/stats.hpp"

namespace qrv::arfima {

void ArfimaParams::validate() const {
    if (!(std::fabs(phi) < 1.0)) throw ConfigError("arfima: |phi| must be < 1");
    if (!(d > -0.5 && d < 0.5)) throw ConfigError("arfima: d must lie in (-0.5, 0.5)");
    if (!(sigma_u2 > 0.0)) throw ConfigError("arfima: sigma_u2 must be positive");
}

std::vector<double> frac_diff_weights(double d, int k_max) {
    if (k_max < 0) throw ConfigError("frac_diff_weights: k_max must be >= 0");
    std::vector<double> w(static_cast<std::size_t>(k_max) + 1);
    w[0] = 1.0;
    for (int k = 1; k <= k_max; ++k)
        w[static_cast<std::size_t>(k)] =
            w[static_cast<std::size_t>(k - 1)] * (static_cast<double>(k - 1) - d) / static_cast<double>(k);
    return w;
}

std::vector<double> ar_coefficients(double phi, double d, int k_max) {
    const std::vector<double> w = frac_diff_weights(d, k_max);
    std::vector<double> c(w.size());
    c[0] = w[0];
    for (std::size_t k = 1; k < w.size(); ++k) c[k] = w[k] - phi * w[k - 1];
    return c;
}

namespace {

// innovations u_t from the truncated filter; pre-sample demeaned values are 0
std::vector<double> filter_innovations(const ArfimaParams& p, const std::vector<double>& x,
                                       int truncation) {
    const std::size_t n = x.size();
    const std::vector<double> c = ar_coefficients(p.phi, p.d, truncation);
    const std::size_t K = c.size() - 1;
    std::vector<double> crev(c.rbegin(), c.rend());  // crev[K - k] = c[k]
    std::vector<double> xd(n);
    for (std::size_t t = 0; t < n; ++t) xd[t] = x[t] - p.mu;

    std::vector<double> u(n, 0.0);
    double u_prev = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t kmax = std::min(t, K);
        // sum_k c[k] * xd[t-k] as a contiguous dot against reversed weights
        const std::span<const double> a(crev.data() + (K - kmax), kmax + 1);
        const std::span<const double> b(xd.data() + (t - kmax), kmax + 1);
        const double acc = kernels::dot(a, b);
        // (1-phi L)(1-L)^d x~ = u_t - psi u_{t-1}
        u[t] = acc + p.ma_psi * u_prev;
        u_prev = u[t];
    }
    return u;
}

}  // namespace

double arfima_loglik(const ArfimaParams& params, const std::vector<double>& log_rv,
                     int truncation) {
    if (truncation < 100) throw ConfigError("arfima truncation must be >= 100");
    if (log_rv.size() < 10) throw DataError("arfima needs at least 10 observations");
    if (!(params.sigma_u2 > 0.0) || !std::isfinite(params.sigma_u2))
        throw NonFiniteLikelihood("sigma_u2 must be positive and finite");

    const std::vector<double> u = filter_innovations(params, log_rv, truncation);
    double ss = 0.0;
    for (const double v : u) ss += v * v;
    const double n = static_cast<double>(log_rv.size());
    const double ll = -0.5 * n * (std::log(2.0 * M_PI) + std::log(params.sigma_u2)) -
                      ss / (2.0 * params.sigma_u2);
    if (!std::isfinite(ll)) throw NonFiniteLikelihood("arfima log-likelihood is not finite");
    return ll;
}

namespace {

// unconstrained <-> natural parameterization for the optimizer
struct Transform {
    bool with_ma;

    ArfimaParams natural(const Eigen::VectorXd& v, double sigma_u2) const {
        ArfimaParams p;
        p.mu = v[0];
        p.phi = std::tanh(v[1]);
        p.d = 0.5 * std::tanh(v[2]);
        p.sigma_u2 = sigma_u2;
        p.ma_psi = with_ma ? std::tanh(v[3]) : 0.0;
        return p;
    }
};

}  // namespace

ArfimaFit fit_arfima(const std::vector<double>& log_rv, const FitOptions& opts) {
    const std::size_t n = log_rv.size();
    if (n < 100) throw DataError("fit_arfima needs at least 100 observations");
    const double var = stats::variance(log_rv);
    if (!(var > 0.0)) throw OptimizerDivergence("fit_arfima: series has zero variance");

    const Transform tf{opts.estimate_ma};
    const int dim = opts.estimate_ma ? 4 : 3;

    // concentrated CSS objective: sigma^2 profiled out
    auto neg_conc_ll = [&](const Eigen::VectorXd& v) -> double {
        ArfimaParams p = tf.natural(v, 1.0);
        const std::vector<double> u = filter_innovations(p, log_rv, opts.truncation);
        double ss = 0.0;
        for (const double w : u) ss += w * w;
        if (!(ss > 0.0) || !std::isfinite(ss)) return std::numeric_limits<double>::infinity();
        return 0.5 * static_cast<double>(n) * std::log(ss / static_cast<double>(n));
    };

    const double m0 = stats::mean(log_rv);
    double best_val = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x;
    const std::pair<double, double> starts[] = {{0.05, 0.0}, {0.35, 0.0}, {0.35, -0.2}};
    for (const auto& [d0, phi0] : starts) {
        Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
        x0[0] = m0;
        x0[1] = std::atanh(phi0);
        x0[2] = std::atanh(2.0 * d0);
        optim::NelderMeadOptions nm;
        nm.max_iterations = opts.max_iterations;
        nm.initial_step = 0.2;
        optim::Result r1 = optim::nelder_mead(neg_conc_ll, x0, nm);
        optim::BfgsOptions bo;
        bo.max_iterations = opts.max_iterations / 2;
        optim::Result r2 = optim::bfgs(neg_conc_ll, r1.x, bo);
        const double v = std::min(r1.value, r2.value);
        const Eigen::VectorXd& x = r2.value <= r1.value ? r2.x : r1.x;
        if (v < best_val) {
            best_val = v;
            best_x = x;
        }
    }
    if (!std::isfinite(best_val)) throw OptimizerDivergence("fit_arfima: optimizer failed");

    ArfimaFit fit;
    fit.n = static_cast<int>(n);
    ArfimaParams p = tf.natural(best_x, 1.0);
    const std::vector<double> u = filter_innovations(p, log_rv, opts.truncation);
    double ss = 0.0;
    for (const double w : u) ss += w * w;
    p.sigma_u2 = ss / static_cast<double>(n);
    fit.params = p;
    fit.loglik = arfima_loglik(p, log_rv, opts.truncation);
    const int k = dim + 1;  // sigma_u2 counts as a parameter
    fit.aic = (2.0 * k - 2.0 * fit.loglik) / static_cast<double>(n);

    // t-stats from the numerical Hessian in natural parameters
    const int np = dim + 1;
    Eigen::VectorXd theta(np);
    theta[0] = p.mu;
    theta[1] = p.phi;
    theta[2] = p.d;
    theta[3] = p.sigma_u2;
    if (opts.estimate_ma) theta[4] = p.ma_psi;
    auto ll_nat = [&](const Eigen::VectorXd& v) -> double {
        ArfimaParams q;
        q.mu = v[0];
        q.phi = v[1];
        q.d = v[2];
        q.sigma_u2 = v[3];
        q.ma_psi = opts.estimate_ma ? v[4] : 0.0;
        if (!(std::fabs(q.phi) < 1.0) || !(q.d > -0.5 && q.d < 0.5) || !(q.sigma_u2 > 0.0))
            return std::numeric_limits<double>::quiet_NaN();
        try {
            return arfima_loglik(q, log_rv, opts.truncation);
        } catch (const NonFiniteLikelihood&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    Eigen::MatrixXd H(np, np);
    const double base_ll = ll_nat(theta);
    for (int i = 0; i < np; ++i) {
        const double hi = 1e-4 * std::max(1.0, std::fabs(theta[i]));
        for (int j = i; j < np; ++j) {
            const double hj = 1e-4 * std::max(1.0, std::fabs(theta[j]));
            Eigen::VectorXd t1 = theta, t2 = theta, t3 = theta, t4 = theta;
            if (i == j) {
                t1[i] += hi;
                t2[i] -= hi;
                H(i, i) = (ll_nat(t1) - 2.0 * base_ll + ll_nat(t2)) / (hi * hi);
            } else {
                t1[i] += hi; t1[j] += hj;
                t2[i] += hi; t2[j] -= hj;
                t3[i] -= hi; t3[j] += hj;
                t4[i] -= hi; t4[j] -= hj;
                H(i, j) = H(j, i) =
                    (ll_nat(t1) - ll_nat(t2) - ll_nat(t3) + ll_nat(t4)) / (4.0 * hi * hj);
            }
        }
    }
    fit.tstats.assign(static_cast<std::size_t>(np), std::numeric_limits<double>::quiet_NaN());
    if (H.allFinite()) {
        const Eigen::MatrixXd cov = (-H).completeOrthogonalDecomposition().pseudoInverse();
        for (int i = 0; i < np; ++i) {
            const double v = cov(i, i);
            if (v > 0.0) fit.tstats[static_cast<std::size_t>(i)] = theta[i] / std::sqrt(v);
        }
    }
    return fit;
}

std::vector<double> simulate_arfima(const ArfimaParams& params, std::size_t n, std::size_t burn_in,
                                    Rng& rng, int truncation) {
    params.validate();
    const std::vector<double> c = ar_coefficients(params.phi, params.d, truncation);
    const double sd = std::sqrt(params.sigma_u2);
    const std::size_t total = n + burn_in;
    std::vector<double> x(total, 0.0);  // demeaned
    double u_prev = 0.0;
    for (std::size_t t = 0; t < total; ++t) {
        const std::size_t kmax = std::min<std::size_t>(t, c.size() - 1);
        double acc = 0.0;
        for (std::size_t k = 1; k <= kmax; ++k) acc -= c[k] * x[t - k];
        const double u = sd * rng.normal();
        x[t] = acc + u - params.ma_psi * u_prev;
        u_prev = u;
    }
    std::vector<double> out(x.end() - static_cast<std::ptrdiff_t>(n), x.end());
    for (double& v : out) v += params.mu;
    return out;
}

namespace {

// mixture CDF G(x) = mean_j Phi(x / sqrt(V_j)) and root-solve G(x) = alpha
double mixture_quantile(const std::vector<double>& vols, double alpha) {
    if (alpha == 0.5) return 0.0;
    const double z = stats::norm_quantile(alpha);
    double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
    for (const double s : vols) {
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    double lo = z < 0 ? z * smax : z * smin;
    double hi = z < 0 ? z * smin : z * smax;
    auto cdf = [&](double x) {
        double acc = 0.0;
        for (const double s : vols) acc += stats::norm_cdf(x / s);
        return acc / static_cast<double>(vols.size());
    };
    double flo = cdf(lo) - alpha, fhi = cdf(hi) - alpha;
    if (flo > 1e-12 || fhi < -1e-12)
        throw RootBracketFailure("mixture quantile bracket failed");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = cdf(mid) - alpha;
        if (std::fabs(fm) < 1e-13 || (hi - lo) < 1e-13 * (1.0 + std::fabs(mid))) return mid;
        if (fm < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

MixtureForecast forecast_mixture(const ArfimaParams& params, const std::vector<double>& log_rv,
                                 int horizon, const std::vector<double>& alphas,
                                 const ForecastOptions& opts) {
    params.validate();
    if (horizon < 1) throw ConfigError("forecast horizon must be >= 1");
    if (log_rv.size() < 50) throw DataError("forecast needs at least 50 history observations");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0 && alphas[i] < 1.0)) throw ConfigError("alpha outside (0,1)");
        if (i > 0 && alphas[i] <= alphas[i - 1]) throw ConfigError("alphas must be increasing");
    }

    const int trunc = std::min<int>(opts.truncation, static_cast<int>(log_rv.size()));
    const std::vector<double> c = ar_coefficients(params.phi, params.d, trunc);
    const std::size_t nh = log_rv.size();

    // innovation path over history (needed for the MA term and its forecast)
    std::vector<double> x(nh);
    for (std::size_t t = 0; t < nh; ++t) x[t] = log_rv[t] - params.mu;
    double u_last = 0.0;
    if (params.ma_psi != 0.0) {
        double u_prev = 0.0;
        for (std::size_t t = 0; t < nh; ++t) {
            const std::size_t kmax = std::min<std::size_t>(t, c.size() - 1);
            double acc = 0.0;
            for (std::size_t k = 0; k <= kmax; ++k) acc += c[k] * x[t - k];
            u_prev = acc + params.ma_psi * u_prev;
        }
        u_last = u_prev;
    }

    MixtureForecast out;
    out.horizon = horizon;
    out.n_draws = opts.n_draws;
    out.seed = opts.seed;

    const double sd = std::sqrt(params.sigma_u2);

    // one-step Gaussian predictive of log RV (analytic route for h = 1)
    auto cond_mean = [&](const std::vector<double>& hist) {
        double acc = 0.0;
        const std::size_t m = hist.size();
        const std::size_t kmax = std::min<std::size_t>(m, c.size() - 1);
        for (std::size_t k = 1; k <= kmax; ++k) acc -= c[k] * hist[m - k];
        return acc + params.ma_psi * u_last;
    };
    const double m1 = params.mu + cond_mean(x);

    if (horizon == 1) {
        for (const double a : alphas)
            out.rv_quantiles[a] = std::exp(0.5 * (m1 + sd * stats::norm_quantile(a)));
    }

    // the history part of each forecast step is path-independent: precompute
    // it once, leaving only the within-horizon recursion per path
    const std::size_t K = c.size() - 1;
    std::vector<double> hist_part(static_cast<std::size_t>(horizon), 0.0);
    for (int i = 0; i < horizon; ++i) {
        const std::size_t t = nh + static_cast<std::size_t>(i);
        const std::size_t kmax = std::min(t, K);
        double acc = 0.0;
        for (std::size_t k = static_cast<std::size_t>(i) + 1; k <= kmax; ++k)
            acc -= c[k] * x[t - k];
        hist_part[static_cast<std::size_t>(i)] = acc;
    }

    Rng master(opts.seed);
    const std::size_t J = static_cast<std::size_t>(opts.n_draws);
    std::vector<double> agg_vol(J);       // sqrt(sum_i RV_i) per path
    std::vector<double> agg_rv_sqrt(J);   // same quantity for RV quantiles
    std::vector<double> sim(static_cast<std::size_t>(horizon));
    for (std::size_t j = 0; j < J; ++j) {
        Rng rng = master.substream(j);
        double u_prev = u_last;
        double total_rv = 0.0;
        for (int i = 0; i < horizon; ++i) {
            double acc = hist_part[static_cast<std::size_t>(i)];
            const std::size_t ksim = std::min<std::size_t>(static_cast<std::size_t>(i), K);
            for (std::size_t k = 1; k <= ksim; ++k)
                acc -= c[k] * sim[static_cast<std::size_t>(i) - k];
            const double u = sd * rng.normal();
            sim[static_cast<std::size_t>(i)] = acc + u - params.ma_psi * u_prev;
            u_prev = u;
            total_rv += std::exp(sim[static_cast<std::size_t>(i)] + params.mu);
        }
        const double v = std::sqrt(total_rv);
        agg_vol[j] = v;
        agg_rv_sqrt[j] = v;
    }

    for (const double a : alphas) {
        out.return_quantiles[a] = mixture_quantile(agg_vol, a);
        if (horizon > 1) out.rv_quantiles[a] = stats::quantile(agg_rv_sqrt, a);
    }
    return out;
}

std::string params_to_json(const ArfimaFit& fit) {
    nlohmann::json j;
    j["mu"] = fit.params.mu;
    j["phi"] = fit.params.phi;
    j["d"] = fit.params.d;
    j["sigma_u2"] = fit.params.sigma_u2;
    j["ma_psi"] = fit.params.ma_psi;
    j["tstats"] = fit.tstats;
    j["loglik"] = fit.loglik;
    j["aic"] = fit.aic;
    j["n"] = fit.n;
    return j.dump(2);
}

std::string forecast_to_json(const MixtureForecast& f) {
    auto key = [](double a) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%g", a);
        return std::string(buf);
    };
    nlohmann::json j;
    j["horizon"] = f.horizon;
    j["n_draws"] = f.n_draws;
    j["seed"] = f.seed;
    nlohmann::json rv = nlohmann::json::object(), ret = nlohmann::json::object();
    for (const auto& [a, q] : f.rv_quantiles) rv[key(a)] = q;
    for (const auto& [a, q] : f.return_quantiles) ret[key(a)] = q;
    j["rv_sqrt_quantiles"] = rv;
    j["return_quantiles"] = ret;
    return j.dump(2);
}

}  // namespace qrv::arfima
