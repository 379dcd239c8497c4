#include "qrv/caviar.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "qrv/errors.hpp"
#include "qrv/kernels.hpp"
#include "qrv/optim.hpp"
#include "qrv/rng.hpp"
#include "qrv/stats.hpp"

namespace qrv::caviar {

namespace {
constexpr double kOverflowGuard = 1e10;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

Eigen::VectorXd CaviarParams::packed() const {
    Eigen::VectorXd v(beta.size() + gamma.size());
    v << beta, gamma;
    return v;
}

CaviarParams CaviarParams::unpack(const CaviarSpec& spec, const Eigen::VectorXd& v) {
    if (v.size() != static_cast<Eigen::Index>(spec.n_params()))
        throw DimensionMismatch("caviar parameter vector has wrong length");
    CaviarParams p;
    p.beta = v.head(spec.n_beta());
    p.gamma = v.tail(v.size() - spec.n_beta());
    return p;
}

PathResult evaluate_quantile_path(const CaviarSpec& spec, const CaviarParams& params,
                                  const std::vector<double>& returns, const Eigen::MatrixXd& exog,
                                  double q0) {
    const std::size_t n = returns.size();
    if (n < 2) throw DataError("caviar path needs at least 2 observations");
    const std::size_t k = spec.exog_labels.size();
    if (k > 0 && (static_cast<std::size_t>(exog.rows()) != n ||
                  static_cast<std::size_t>(exog.cols()) != k))
        throw DimensionMismatch("exogenous matrix must be n x k");
    if (params.beta.size() != spec.n_beta() ||
        params.gamma.size() != static_cast<Eigen::Index>(k))
        throw DimensionMismatch("caviar parameter shapes do not match spec");

    const double b1 = params.beta[0], b2 = params.beta[1], b3 = params.beta[2];
    const double b4 = spec.form == Form::AS ? params.beta[3] : 0.0;

    PathResult out;
    out.q_path.resize(n);
    out.q_path[0] = q0;
    double q = q0;
    for (std::size_t t = 0; t + 1 < n; ++t) {
        const double r = returns[t];
        double next = b1 + b2 * q;
        if (spec.form == Form::SAV) {
            next += b3 * std::fabs(r);
        } else {
            const double rp = r >= 0.0 ? r : 0.0;
            const double rn = r < 0.0 ? r : 0.0;
            next += b3 * rp + b4 * rn;
        }
        if (k > 0) {
            const std::size_t x_idx = spec.exog_lagged ? (t == 0 ? 0 : t - 1) : t;
            if (spec.exog_lagged && t == 0) {
                // x_{-1} unavailable: hold the initial condition one step
                next = q0;
            } else {
                for (std::size_t j = 0; j < k; ++j)
                    next += params.gamma[static_cast<Eigen::Index>(j)] *
                            exog(static_cast<Eigen::Index>(x_idx), static_cast<Eigen::Index>(j));
            }
        }
        if (std::fabs(next) > kOverflowGuard)
            throw ExplosivePath("caviar recursion exceeded overflow guard at t=" + std::to_string(t + 1));
        q = next;
        out.q_path[t + 1] = q;
    }

    // objective over t = 1..n-1 (q0 term excluded)
    std::vector<double> err(n - 1);
    for (std::size_t t = 1; t < n; ++t) err[t - 1] = returns[t] - out.q_path[t];
    out.objective = kernels::check_loss_sum(err, spec.alpha) / static_cast<double>(n - 1);
    return out;
}

namespace {

double objective_or_inf(const CaviarSpec& spec, const Eigen::VectorXd& packed,
                        const std::vector<double>& returns, const Eigen::MatrixXd& exog,
                        double q0) {
    try {
        const CaviarParams p = CaviarParams::unpack(spec, packed);
        return evaluate_quantile_path(spec, p, returns, exog, q0).objective;
    } catch (const ExplosivePath&) {
        return kInf;
    }
}

}  // namespace

CaviarFit fit_caviar(const CaviarSpec& spec, const std::vector<double>& returns,
                     const Eigen::MatrixXd& exog, const FitOptions& opts) {
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw ConfigError("alpha outside (0,1)");
    const std::size_t n = returns.size();
    if (n < 20) throw DataError("caviar needs at least 20 observations");

    CaviarFit fit;
    fit.spec = spec;
    fit.seed = opts.seed;
    fit.starts = opts.n_starts;
    if (n < 300)
        fit.warnings.push_back("only " + std::to_string(n) + " observations; estimates may be unstable");

    // initial condition: empirical alpha-quantile of the first 10% of the data
    const std::size_t head = std::max<std::size_t>(1, n / 10);
    fit.q0 = stats::quantile(std::span<const double>(returns.data(), head), spec.alpha);

    const std::size_t np = spec.n_params();
    Rng rng(opts.seed);
    auto obj = [&](const Eigen::VectorXd& v) {
        return objective_or_inf(spec, v, returns, exog, fit.q0);
    };

    // stage 1: random starts
    std::vector<std::pair<double, Eigen::VectorXd>> best;
    for (int s = 0; s < opts.n_starts; ++s) {
        Eigen::VectorXd v(np);
        for (std::size_t j = 0; j < np; ++j) v[static_cast<Eigen::Index>(j)] = rng.uniform(-1.0, 1.0);
        v[1] = rng.uniform(0.0, 1.0);  // autoregressive coefficient kept in [0,1)
        const double f = obj(v);
        if (!std::isfinite(f)) continue;
        best.emplace_back(f, v);
    }
    if (best.empty()) throw AllStartsFailed("no random start produced a finite caviar objective");
    const int keep = std::min<int>(opts.n_polish, static_cast<int>(best.size()));
    std::partial_sort(best.begin(), best.begin() + keep, best.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

    // stage 2: polish with simplex, then quasi-Newton
    double best_val = kInf;
    Eigen::VectorXd best_x;
    for (int i = 0; i < keep; ++i) {
        optim::NelderMeadOptions nm;
        nm.max_iterations = opts.simplex_iterations;
        nm.initial_step = 0.05;
        optim::Result r1 = optim::nelder_mead(obj, best[i].second, nm);
        optim::BfgsOptions bo;
        bo.max_iterations = opts.quasi_newton_iterations;
        optim::Result r2 = optim::bfgs(obj, r1.x, bo);
        const double v = std::min(r1.value, r2.value);
        const Eigen::VectorXd& x = r2.value <= r1.value ? r2.x : r1.x;
        if (v < best_val) {
            best_val = v;
            best_x = x;
        }
    }
    if (!std::isfinite(best_val)) throw AllStartsFailed("polishing failed to produce a finite objective");

    fit.params = CaviarParams::unpack(spec, best_x);
    const PathResult path = evaluate_quantile_path(spec, fit.params, returns, exog, fit.q0);
    fit.objective = path.objective;
    fit.q_path = path.q_path;

    // near-flat objective along a coordinate signals an unidentified parameter
    for (std::size_t j = 0; j < np; ++j) {
        Eigen::VectorXd probe = best_x;
        probe[static_cast<Eigen::Index>(j)] += 0.25;
        const double f_probe = obj(probe);
        if (std::isfinite(f_probe) && std::fabs(f_probe - best_val) < 1e-12) {
            std::string label = j < static_cast<std::size_t>(spec.n_beta())
                                    ? "beta" + std::to_string(j + 1)
                                    : "gamma(" + spec.exog_labels[j - spec.n_beta()] + ")";
            fit.warnings.push_back("objective flat in " + label + "; parameter may be unidentified");
        }
    }
    return fit;
}

Eigen::MatrixXd quantile_path_gradient(const CaviarSpec& spec, const CaviarParams& params,
                                       const std::vector<double>& returns,
                                       const Eigen::MatrixXd& exog, double q0) {
    const std::size_t n = returns.size();
    const std::size_t k = spec.exog_labels.size();
    const std::size_t np = spec.n_params();
    const double b2 = params.beta[1];

    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(np));
    std::vector<double> q(n);
    q[0] = q0;
    for (std::size_t t = 0; t + 1 < n; ++t) {
        const double r = returns[t];
        // recursion value (mirrors evaluate_quantile_path)
        double next = params.beta[0] + b2 * q[t];
        Eigen::VectorXd step = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(np));
        step[0] = 1.0;
        step[1] = q[t];
        if (spec.form == Form::SAV) {
            next += params.beta[2] * std::fabs(r);
            step[2] = std::fabs(r);
        } else {
            const double rp = r >= 0.0 ? r : 0.0;
            const double rn = r < 0.0 ? r : 0.0;
            next += params.beta[2] * rp + params.beta[3] * rn;
            step[2] = rp;
            step[3] = rn;
        }
        bool held = false;
        if (k > 0) {
            const std::size_t x_idx = spec.exog_lagged ? (t == 0 ? 0 : t - 1) : t;
            if (spec.exog_lagged && t == 0) {
                next = q0;
                held = true;
            } else {
                for (std::size_t j = 0; j < k; ++j) {
                    const double xv = exog(static_cast<Eigen::Index>(x_idx), static_cast<Eigen::Index>(j));
                    next += params.gamma[static_cast<Eigen::Index>(j)] * xv;
                    step[static_cast<Eigen::Index>(spec.n_beta() + j)] = xv;
                }
            }
        }
        if (held) {
            grad.row(static_cast<Eigen::Index>(t + 1)).setZero();
        } else {
            grad.row(static_cast<Eigen::Index>(t + 1)) =
                step.transpose() + b2 * grad.row(static_cast<Eigen::Index>(t));
        }
        q[t + 1] = next;
    }
    return grad;
}

StdErrorTable caviar_std_errors(const CaviarFit& fit, const std::vector<double>& returns,
                                const Eigen::MatrixXd& exog,
                                const std::vector<double>& bandwidth_grid) {
    if (bandwidth_grid.empty()) throw ConfigError("empty bandwidth grid");
    const std::size_t n = returns.size();
    const double alpha = fit.spec.alpha;
    const Eigen::MatrixXd grad =
        quantile_path_gradient(fit.spec, fit.params, returns, exog, fit.q0);
    const std::size_t np = fit.spec.n_params();
    const double nd = static_cast<double>(n - 1);

    // A = (1/T) sum (alpha - Hit_t)^2 g_t g_t'
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np),
                                              static_cast<Eigen::Index>(np));
    for (std::size_t t = 1; t < n; ++t) {
        const double e = returns[t] - fit.q_path[t];
        const double hit = e < 0.0 ? 1.0 : 0.0;
        const double w = (alpha - hit) * (alpha - hit);
        A.noalias() += w * grad.row(static_cast<Eigen::Index>(t)).transpose() *
                       grad.row(static_cast<Eigen::Index>(t));
    }
    A /= nd;

    StdErrorTable table;
    table.bandwidths = bandwidth_grid;
    for (const double c : bandwidth_grid) {
        if (!(c > 0.0)) throw ConfigError("bandwidths must be positive");
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np),
                                                  static_cast<Eigen::Index>(np));
        for (std::size_t t = 1; t < n; ++t) {
            const double e = returns[t] - fit.q_path[t];
            if (std::fabs(e) < c)
                D.noalias() += grad.row(static_cast<Eigen::Index>(t)).transpose() *
                               grad.row(static_cast<Eigen::Index>(t));
        }
        D /= (2.0 * c * nd);
        const Eigen::MatrixXd Dinv = D.completeOrthogonalDecomposition().pseudoInverse();
        const Eigen::MatrixXd V = Dinv * A * Dinv / nd;
        table.std_errors.push_back(V.diagonal().cwiseMax(0.0).cwiseSqrt());
    }

    // stable-region selection
    if (bandwidth_grid.size() == 1) {
        table.selected = 0;
        table.selected_se = table.std_errors[0];
        return table;
    }
    auto stable_step = [&](std::size_t i) {
        for (std::size_t j = 0; j < np; ++j) {
            const double a = table.std_errors[i][static_cast<Eigen::Index>(j)];
            const double b = table.std_errors[i + 1][static_cast<Eigen::Index>(j)];
            if (!(a > 0.0) || !(b > 0.0)) return false;
            if (std::fabs(b - a) / a >= 0.10) return false;
        }
        return true;
    };
    std::size_t best_len = 0, best_start = 0;
    std::size_t run_start = 0, run_len = 1;
    for (std::size_t i = 0; i + 1 < bandwidth_grid.size(); ++i) {
        if (stable_step(i)) {
            ++run_len;
        } else {
            if (run_len > best_len) {
                best_len = run_len;
                best_start = run_start;
            }
            run_start = i + 1;
            run_len = 1;
        }
    }
    if (run_len > best_len) {
        best_len = run_len;
        best_start = run_start;
    }
    if (best_len >= 2) {
        const std::size_t mid = best_start + best_len / 2;
        table.selected = mid;
        table.selected_se = table.std_errors[mid];
    }
    return table;
}

std::vector<double> default_bandwidth_grid(const CaviarFit& fit, const std::vector<double>& returns,
                                           const Eigen::MatrixXd& exog) {
    (void)exog;
    std::vector<double> err;
    err.reserve(returns.size() - 1);
    for (std::size_t t = 1; t < returns.size(); ++t) err.push_back(returns[t] - fit.q_path[t]);
    const double sd = std::sqrt(stats::variance(err));
    const double base = sd * std::pow(static_cast<double>(err.size()), -1.0 / 3.0);
    std::vector<double> grid;
    for (const double mult : {0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0}) grid.push_back(mult * base);
    return grid;
}

std::string fit_to_json(const CaviarFit& fit, const StdErrorTable* se) {
    nlohmann::json j;
    j["form"] = fit.spec.form == Form::SAV ? "SAV" : "AS";
    j["alpha"] = fit.spec.alpha;
    j["horizon"] = fit.spec.horizon;
    j["exog"] = fit.spec.exog_labels;
    j["beta"] = std::vector<double>(fit.params.beta.data(),
                                    fit.params.beta.data() + fit.params.beta.size());
    j["gamma"] = std::vector<double>(fit.params.gamma.data(),
                                     fit.params.gamma.data() + fit.params.gamma.size());
    j["objective"] = fit.objective;
    j["q0"] = fit.q0;
    j["seed"] = fit.seed;
    j["starts"] = fit.starts;
    j["warnings"] = fit.warnings;
    if (se) {
        nlohmann::json tbl = nlohmann::json::array();
        for (std::size_t i = 0; i < se->bandwidths.size(); ++i) {
            nlohmann::json row;
            row["bandwidth"] = se->bandwidths[i];
            row["std_errors"] = std::vector<double>(
                se->std_errors[i].data(), se->std_errors[i].data() + se->std_errors[i].size());
            tbl.push_back(row);
        }
        j["std_error_table"] = tbl;
        if (se->selected) j["selected_bandwidth"] = se->bandwidths[*se->selected];
    }
    return j.dump(2);
}

}  // namespace qrv::caviar
