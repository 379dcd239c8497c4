#include "qrv/qr.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "qrv/errors.hpp"
#include "qrv/kernels.hpp"
#include "qrv/rng.hpp"

namespace qrv::qr {

void Dataset::validate() const {
    const std::size_t nn = n(), pp = p();
    if (nn == 0 || pp == 0) throw DataError("empty dataset");
    if (static_cast<std::size_t>(x.rows()) != nn) throw DimensionMismatch("y/x row mismatch");
    if (nn <= pp) throw DataError("need more observations than regressors");
    if (!labels.empty() && labels.size() != pp) throw DimensionMismatch("label count != p");
    if (!y.allFinite() || !x.allFinite()) throw DataError("non-finite entries in dataset");
}

double check_loss(double x, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha outside (0,1)");
    return (alpha - (x < 0.0 ? 1.0 : 0.0)) * x;
}

double mean_check_loss(const Eigen::VectorXd& residuals, double alpha) {
    const std::span<const double> r(residuals.data(), static_cast<std::size_t>(residuals.size()));
    return kernels::check_loss_sum(r, alpha) / static_cast<double>(residuals.size());
}

namespace {

void check_rank(const Eigen::MatrixXd& x) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < x.cols())
        throw RankDeficientDesign("design matrix is rank deficient (rank " +
                                  std::to_string(qr.rank()) + " of " + std::to_string(x.cols()) + ")");
}

// Largest step in [0, 1] keeping v + t*dv strictly positive (fraction 0.9995).
double step_length(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double t = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv[i] < 0.0) t = std::min(t, -v[i] / dv[i]);
    }
    return std::min(1.0, 0.9995 * t);
}

}  // namespace

// Frisch-Newton interior point on the quantile-regression dual:
//   max y'a  s.t.  X'a = (1-alpha) X'1,  a in [0,1]^n,
// with Mehrotra predictor-corrector steps. The multipliers of the equality
// constraint converge to the regression coefficients.
QuantileFit fit_lqr(const Dataset& data, double alpha, const SolverOptions& opts) {
    data.validate();
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha outside (0,1)");
    check_rank(data.x);

    const Eigen::MatrixXd& X = data.x;
    const Eigen::VectorXd& y = data.y;
    const Eigen::Index n = X.rows();

    const Eigen::VectorXd rhs = (1.0 - alpha) * (X.transpose() * Eigen::VectorXd::Ones(n));

    Eigen::VectorXd a = Eigen::VectorXd::Constant(n, 1.0 - alpha);
    Eigen::VectorXd s = Eigen::VectorXd::Constant(n, alpha);

    // dual start: OLS coefficients; stationarity X b + w - z = y held exactly
    // (w pairs with the upper bound, z with the lower)
    Eigen::VectorXd b = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    Eigen::VectorXd r = y - X * b;
    const double eps0 = std::max(1e-3, 0.1 * r.cwiseAbs().mean());
    Eigen::VectorXd w = r.cwiseMax(0.0).array() + eps0;
    Eigen::VectorXd z = (-r).cwiseMax(0.0).array() + eps0;

    double gap = a.dot(z) + s.dot(w);
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const double dual_obj = y.dot(a);
        if (gap <= opts.gap_tol * (1.0 + std::fabs(dual_obj))) break;

        r = y - X * b;
        const Eigen::VectorXd za = z.cwiseQuotient(a);
        const Eigen::VectorXd ws = w.cwiseQuotient(s);
        const Eigen::VectorXd d = (za + ws).cwiseInverse();
        const Eigen::VectorXd rp = rhs - X.transpose() * a;

        const Eigen::MatrixXd XtDX = X.transpose() * d.asDiagonal() * X;
        Eigen::LDLT<Eigen::MatrixXd> fact(XtDX);
        if (fact.info() != Eigen::Success)
            throw NonConvergence("interior point: normal equations factorization failed");

        // predictor (affine) direction
        Eigen::VectorXd db = fact.solve(X.transpose() * (d.cwiseProduct(r)) - rp);
        Eigen::VectorXd da = d.cwiseProduct(r - X * db);
        Eigen::VectorXd dz = -z - za.cwiseProduct(da);
        Eigen::VectorXd dw = -w + ws.cwiseProduct(da);

        double ap = step_length(a, da);
        ap = std::min(ap, step_length(s, -da));
        double ad = step_length(z, dz);
        ad = std::min(ad, step_length(w, dw));

        const double gap_aff = (a + ap * da).dot(z + ad * dz) + (s - ap * da).dot(w + ad * dw);
        const double sigma = std::pow(gap_aff / gap, 3.0);
        const double mu = sigma * gap / (2.0 * static_cast<double>(n));

        // corrector
        const Eigen::VectorXd gz = (Eigen::VectorXd::Constant(n, mu) - da.cwiseProduct(dz)).cwiseQuotient(a);
        const Eigen::VectorXd gw = (Eigen::VectorXd::Constant(n, mu) + da.cwiseProduct(dw)).cwiseQuotient(s);
        const Eigen::VectorXd g = gz - gw;

        db = fact.solve(X.transpose() * (d.cwiseProduct(r + g)) - rp);
        da = d.cwiseProduct(r + g - X * db);
        dz = gz - z - za.cwiseProduct(da);
        dw = gw - w + ws.cwiseProduct(da);

        ap = step_length(a, da);
        ap = std::min(ap, step_length(s, -da));
        ad = step_length(z, dz);
        ad = std::min(ad, step_length(w, dw));

        a += ap * da;
        s -= ap * da;
        b += ad * db;
        z += ad * dz;
        w += ad * dw;

        if (!b.allFinite() || !a.allFinite())
            throw NonConvergence("interior point: iterates diverged");
        gap = a.dot(z) + s.dot(w);
    }
    if (it >= opts.max_iterations)
        throw NonConvergence("interior point: iteration cap reached (gap " + std::to_string(gap) + ")");

    QuantileFit fit;
    fit.alpha = alpha;
    fit.beta = b;
    fit.residuals = y - X * b;
    fit.objective = mean_check_loss(fit.residuals, alpha);
    fit.iterations = it;
    fit.duality_gap = gap;
    fit.labels = data.labels;
    return fit;
}

double predict_quantile(const QuantileFit& fit, const Eigen::VectorXd& x_row) {
    if (x_row.size() != fit.beta.size())
        throw DimensionMismatch("predict_quantile: row length != coefficient count");
    if (!x_row.allFinite()) throw DataError("predict_quantile: non-finite regressors");
    return fit.beta.dot(x_row);
}

QuantileProcess quantile_process(const Dataset& data, const std::vector<double>& alphas,
                                 const SolverOptions& opts) {
    if (alphas.empty()) throw ConfigError("empty alpha grid");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0 && alphas[i] < 1.0)) throw ConfigError("alpha outside (0,1)");
        if (i > 0 && alphas[i] <= alphas[i - 1])
            throw ConfigError("alpha grid must be strictly increasing");
    }
    QuantileProcess out;
    out.alphas = alphas;
    out.fits.reserve(alphas.size());
    for (const double a : alphas) out.fits.push_back(fit_lqr(data, a, opts));

    // crossing report: rows where fitted quantiles are non-monotone in alpha
    const Eigen::Index n = data.x.rows();
    Eigen::MatrixXd preds(n, static_cast<Eigen::Index>(alphas.size()));
    for (std::size_t j = 0; j < alphas.size(); ++j) preds.col(j) = data.x * out.fits[j].beta;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t j = 1; j < alphas.size(); ++j) {
            if (preds(i, j) < preds(i, j - 1) - 1e-10) {
                ++out.crossing_rows;
                break;
            }
        }
    }
    return out;
}

MbbResult mbb_covariance(const Dataset& data, double alpha, const BootstrapConfig& cfg,
                         const SolverOptions& opts) {
    data.validate();
    if (cfg.replications < 100) throw ConfigError("bootstrap needs >= 100 replications");
    const std::size_t n = data.n();
    std::size_t L = cfg.block_length > 0
                        ? static_cast<std::size_t>(cfg.block_length)
                        : static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n))));
    if (L < 1 || L > n) throw ConfigError("block length outside [1, n]");

    const QuantileFit base = fit_lqr(data, alpha, opts);
    const std::size_t p = data.p();
    const std::size_t blocks = (n + L - 1) / L;

    Rng master(cfg.seed);
    Eigen::MatrixXd betas(cfg.replications, static_cast<Eigen::Index>(p));
    int failures = 0;
    std::size_t kept = 0;
    for (int rep = 0; rep < cfg.replications; ++rep) {
        Rng rng = master.substream(static_cast<std::uint64_t>(rep));
        Dataset resampled;
        resampled.y.resize(static_cast<Eigen::Index>(n));
        resampled.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        std::size_t row = 0;
        for (std::size_t bidx = 0; bidx < blocks && row < n; ++bidx) {
            const std::size_t start = static_cast<std::size_t>(rng.uniform_int(n));
            for (std::size_t j = 0; j < L && row < n; ++j, ++row) {
                const std::size_t src = (start + j) % n;  // circular scheme
                resampled.y[static_cast<Eigen::Index>(row)] = data.y[static_cast<Eigen::Index>(src)];
                resampled.x.row(static_cast<Eigen::Index>(row)) = data.x.row(static_cast<Eigen::Index>(src));
            }
        }
        try {
            const QuantileFit f = fit_lqr(resampled, alpha, opts);
            betas.row(static_cast<Eigen::Index>(kept++)) = f.beta.transpose();
        } catch (const NumericError&) {
            ++failures;
        }
    }
    if (failures > cfg.replications / 20)
        throw NonConvergence("more than 5% of bootstrap replications failed (" +
                             std::to_string(failures) + "/" + std::to_string(cfg.replications) + ")");

    const Eigen::MatrixXd kept_rows = betas.topRows(static_cast<Eigen::Index>(kept));
    const Eigen::RowVectorXd mean = kept_rows.colwise().mean();
    const Eigen::MatrixXd centered = kept_rows.rowwise() - mean;
    MbbResult res;
    res.cov = centered.transpose() * centered / static_cast<double>(kept - 1);
    res.std_errors = res.cov.diagonal().cwiseSqrt();
    res.tstats.resize(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
        const double se = res.std_errors[static_cast<Eigen::Index>(j)];
        res.tstats[static_cast<Eigen::Index>(j)] = se > 0 ? base.beta[static_cast<Eigen::Index>(j)] / se
                                                          : std::numeric_limits<double>::quiet_NaN();
    }
    res.failed_replications = failures;
    res.degenerate = res.cov.diagonal().maxCoeff() < 1e-12;
    return res;
}

std::string fit_to_json(const QuantileFit& fit, std::size_t crossing_rows) {
    nlohmann::json j;
    j["alpha"] = fit.alpha;
    j["labels"] = fit.labels;
    j["beta"] = std::vector<double>(fit.beta.data(), fit.beta.data() + fit.beta.size());
    if (fit.tstats)
        j["tstats"] = std::vector<double>(fit.tstats->data(), fit.tstats->data() + fit.tstats->size());
    j["objective"] = fit.objective;
    j["iterations"] = fit.iterations;
    j["duality_gap"] = fit.duality_gap;
    j["crossing_rows"] = crossing_rows;
    return j.dump(2);
}

}  // namespace qrv::qr
