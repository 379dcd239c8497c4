#include "qrv/evaluation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "qrv/errors.hpp"
#include "qrv/kernels.hpp"
#include "qrv/rng.hpp"
#include "qrv/stats.hpp"

namespace qrv::eval {

HitSeries hits(const std::vector<double>& observed, const std::vector<double>& quantile_path,
               double alpha, int horizon) {
    if (observed.size() != quantile_path.size())
        throw LengthMismatch("hits: observed/quantile lengths differ");
    if (observed.empty()) throw LengthMismatch("hits: empty series");
    HitSeries hs;
    hs.alpha = alpha;
    hs.horizon = horizon;
    hs.quantile_path = quantile_path;
    hs.hits.resize(observed.size());
    std::size_t count = 0;
    for (std::size_t t = 0; t < observed.size(); ++t) {
        const bool h = observed[t] <= quantile_path[t];
        hs.hits[t] = h;
        count += h ? 1 : 0;
    }
    hs.coverage_hat = static_cast<double>(count) / static_cast<double>(observed.size());
    return hs;
}

namespace {

struct LogitFit {
    Eigen::VectorXd beta;
    double loglik = 0.0;
    bool converged = false;
};

LogitFit logit_mle(const Eigen::MatrixXd& w, const Eigen::VectorXd& y, double ridge) {
    const Eigen::Index n = w.rows(), p = w.cols();
    LogitFit fit;
    fit.beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta(n), mu(n);
    for (int it = 0; it < 60; ++it) {
        eta = w * fit.beta;
        for (Eigen::Index i = 0; i < n; ++i) mu[i] = 1.0 / (1.0 + std::exp(-eta[i]));
        Eigen::VectorXd g = w.transpose() * (y - mu) - ridge * fit.beta;
        const Eigen::VectorXd s = (mu.array() * (1.0 - mu.array())).max(1e-12).matrix();
        Eigen::MatrixXd h = w.transpose() * s.asDiagonal() * w;
        h.diagonal().array() += ridge;
        const Eigen::VectorXd step = h.ldlt().solve(g);
        fit.beta += step;
        if (!fit.beta.allFinite()) return fit;  // diverged
        if (step.cwiseAbs().maxCoeff() < 1e-9) {
            fit.converged = true;
            break;
        }
    }
    if (fit.beta.cwiseAbs().maxCoeff() > 30.0) fit.converged = false;
    eta = w * fit.beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        // log-likelihood via log1p for stability
        const double e = eta[i];
        ll += y[i] * e - (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e)));
    }
    fit.loglik = ll;
    return fit;
}

struct LrOutcome {
    double lr = 0.0;
    bool separation = false;
};

// LR statistic of the DQ logistic regression against the fixed-coverage null.
LrOutcome dq_lr_stat(const std::vector<bool>& hit, const std::vector<double>& path, double alpha,
                     int n_lags) {
    const std::size_t n = hit.size();
    const std::size_t p = 1 + 2 * static_cast<std::size_t>(n_lags);
    const std::size_t rows = n - static_cast<std::size_t>(n_lags);
    Eigen::MatrixXd w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t t = static_cast<std::size_t>(n_lags); t < n; ++t) {
        const std::size_t r = t - static_cast<std::size_t>(n_lags);
        w(static_cast<Eigen::Index>(r), 0) = 1.0;
        for (int k = 1; k <= n_lags; ++k) {
            w(static_cast<Eigen::Index>(r), k) = hit[t - static_cast<std::size_t>(k)] ? 1.0 : 0.0;
            // forecast issued for period t-k+1 (in the information set at t-k)
            w(static_cast<Eigen::Index>(r), n_lags + k) = path[t - static_cast<std::size_t>(k) + 1];
        }
        y[static_cast<Eigen::Index>(r)] = hit[t] ? 1.0 : 0.0;
    }

    // null: P(hit) = alpha with no dynamics
    double ll0 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        ll0 += y[i] * std::log(alpha) + (1.0 - y[i]) * std::log(1.0 - alpha);

    LogitFit fit = logit_mle(w, y, 0.0);
    LrOutcome out;
    if (!fit.converged) {
        fit = logit_mle(w, y, 1e-6);
        out.separation = true;
    }
    out.lr = 2.0 * (fit.loglik - ll0);
    if (out.lr < 0.0) out.lr = 0.0;  // ridge or roundoff can nick the unrestricted loglik
    return out;
}

}  // namespace

DQResult dq_test(const HitSeries& hs, const DQOptions& opts) {
    if (hs.horizon != 1)
        throw MultiStepRefused("dq_test is only defined for one-step-ahead forecasts");
    const std::size_t n = hs.hits.size();
    const int p = 2 * opts.n_lags + 1;
    if (n <= static_cast<std::size_t>(10 * p))
        throw DataError("dq_test needs more than " + std::to_string(10 * p) + " observations");
    if (!(hs.alpha > 0.0 && hs.alpha < 1.0)) throw ConfigError("alpha outside (0,1)");

    DQResult res;
    res.lags = opts.n_lags;
    res.coverage_hat = hs.coverage_hat;
    const LrOutcome obs = dq_lr_stat(hs.hits, hs.quantile_path, hs.alpha, opts.n_lags);
    res.lr_stat = obs.lr;
    res.separation = obs.separation;
    res.p_value_asymptotic = stats::chi2_sf(obs.lr, p);

    // Monte Carlo null: hits redrawn iid Bernoulli(alpha), quantile path fixed
    Rng rng(opts.seed);
    int ge = 0;
    std::vector<bool> sim(n);
    for (int rep = 0; rep < opts.mc_reps; ++rep) {
        for (std::size_t t = 0; t < n; ++t) sim[t] = rng.bernoulli(hs.alpha);
        const LrOutcome r = dq_lr_stat(sim, hs.quantile_path, hs.alpha, opts.n_lags);
        if (r.lr >= obs.lr) ++ge;
    }
    res.p_value_mc = (1.0 + ge) / (1.0 + opts.mc_reps);
    return res;
}

std::vector<double> tick_loss_series(const std::vector<double>& observed,
                                     const std::vector<double>& quantile_path, double alpha) {
    if (observed.size() != quantile_path.size())
        throw LengthMismatch("tick_loss_series: length mismatch");
    std::vector<double> loss(observed.size());
    for (std::size_t t = 0; t < observed.size(); ++t) {
        const double e = observed[t] - quantile_path[t];
        loss[t] = (alpha - (e < 0.0 ? 1.0 : 0.0)) * e;
    }
    return loss;
}

DMResult dm_test(const std::vector<double>& loss_a, const std::vector<double>& loss_b, int horizon,
                 int nw_lags) {
    if (loss_a.size() != loss_b.size()) throw LengthMismatch("dm_test: length mismatch");
    const std::size_t n = loss_a.size();
    if (n < 30) throw DataError("dm_test needs at least 30 observations");
    std::vector<double> d(n);
    double scale = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        d[t] = loss_a[t] - loss_b[t];
        scale = std::max(scale, std::fabs(loss_a[t]) + std::fabs(loss_b[t]));
    }
    DMResult res;
    res.nw_lags = nw_lags >= 0 ? nw_lags : std::max(0, horizon - 1);
    res.mean_loss_a = stats::mean(loss_a);
    res.mean_loss_b = stats::mean(loss_b);
    const double lrv = stats::newey_west_variance(d, res.nw_lags);
    if (!(lrv > 1e-24 * (1.0 + scale * scale)))
        throw DegenerateVariance("dm_test: loss differential has (near-)zero variance");
    res.stat = stats::mean(d) / std::sqrt(lrv / static_cast<double>(n));
    res.p_value = 2.0 * (1.0 - stats::norm_cdf(std::fabs(res.stat)));
    return res;
}

RollingReport rolling_forecast_eval(const std::vector<ModelEntry>& models,
                                    const std::string& benchmark_name, std::size_t n_rows,
                                    const std::function<double(std::size_t)>& realized_of,
                                    const RollingOptions& opts) {
    if (models.empty()) throw ConfigError("no models to evaluate");
    if (opts.alphas.empty()) throw ConfigError("no alphas to evaluate");
    const int h = opts.horizon;
    const std::size_t gap = static_cast<std::size_t>(h - 1);  // training rows must not see targets past r
    const std::size_t span = (opts.scheme.n_oos - 1) * opts.stride;
    if (n_rows < opts.scheme.window + gap + span + 1)
        throw InsufficientHistory("rolling evaluation needs " +
                                  std::to_string(opts.scheme.window + gap + span + 1) + " rows, have " +
                                  std::to_string(n_rows));

    RollingReport report;
    report.target_rows.resize(opts.scheme.n_oos);
    const std::size_t last = n_rows - 1;
    for (std::size_t i = 0; i < opts.scheme.n_oos; ++i)
        report.target_rows[i] = last - (opts.scheme.n_oos - 1 - i) * opts.stride;

    report.realized.resize(opts.scheme.n_oos);
    for (std::size_t i = 0; i < opts.scheme.n_oos; ++i)
        report.realized[i] = realized_of(report.target_rows[i]);

    int bench_idx = -1;
    for (std::size_t m = 0; m < models.size(); ++m)
        if (models[m].name == benchmark_name) bench_idx = static_cast<int>(m);
    if (bench_idx < 0) throw ConfigError("benchmark model '" + benchmark_name + "' not in model list");

    // collect forecasts
    report.forecasts.assign(models.size(),
                            std::vector<std::vector<double>>(
                                opts.alphas.size(), std::vector<double>(opts.scheme.n_oos, 0.0)));
    for (std::size_t m = 0; m < models.size(); ++m) {
        for (std::size_t i = 0; i < opts.scheme.n_oos; ++i) {
            const std::size_t r = report.target_rows[i];
            const std::size_t train_end = r - gap;
            const std::size_t train_begin = train_end - opts.scheme.window;
            const std::vector<double> q =
                models[m].forecaster(train_begin, train_end, r, opts.alphas);
            if (q.size() != opts.alphas.size())
                throw DimensionMismatch("forecaster returned wrong number of quantiles");
            for (std::size_t a = 0; a < opts.alphas.size(); ++a) report.forecasts[m][a][i] = q[a];
        }
    }

    // per-cell statistics
    for (std::size_t m = 0; m < models.size(); ++m) {
        for (std::size_t a = 0; a < opts.alphas.size(); ++a) {
            EvalCell cell;
            cell.model = models[m].name;
            cell.alpha = opts.alphas[a];
            cell.horizon = h;
            cell.n_oos = opts.scheme.n_oos;
            cell.benchmark = benchmark_name;
            const std::vector<double>& path = report.forecasts[m][a];
            const HitSeries hs = hits(report.realized, path, opts.alphas[a], h);
            cell.coverage = hs.coverage_hat;
            const std::vector<double> loss = tick_loss_series(report.realized, path, opts.alphas[a]);
            cell.mean_tick_loss = stats::mean(loss);
            const bool dq_feasible =
                opts.scheme.n_oos > static_cast<std::size_t>(10 * (2 * opts.dq.n_lags + 1));
            if (h == 1 && opts.run_dq && dq_feasible) {
                DQOptions dq = opts.dq;
                dq.seed = derive_seed(opts.dq.seed, m * 1000 + a);
                cell.dq = dq_test(hs, dq);
            }
            if (static_cast<int>(m) != bench_idx) {
                const std::vector<double> bench_loss =
                    tick_loss_series(report.realized, report.forecasts[static_cast<std::size_t>(bench_idx)][a],
                                     opts.alphas[a]);
                try {
                    cell.dm_vs_bench = dm_test(loss, bench_loss, h);
                } catch (const DegenerateVariance&) {
                    cell.dm_degenerate = true;
                }
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

}  // namespace qrv::eval
