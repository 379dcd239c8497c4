#include "qrv/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qrv::optim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const Eigen::VectorXd& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
}
}  // namespace

Result nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const NelderMeadOptions& opts) {
    const int n = static_cast<int>(x0.size());
    std::vector<Eigen::VectorXd> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (int i = 0; i < n; ++i) {
        double step = opts.initial_step * std::max(1.0, std::fabs(x0[i]));
        pts[i + 1][i] += step;
    }
    for (int i = 0; i <= n; ++i) vals[i] = safe_eval(f, pts[i]);

    auto order = [&] {
        std::vector<int> idx(n + 1);
        for (int i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
        std::vector<Eigen::VectorXd> p2(n + 1);
        std::vector<double> v2(n + 1);
        for (int i = 0; i <= n; ++i) {
            p2[i] = pts[idx[i]];
            v2[i] = vals[idx[i]];
        }
        pts.swap(p2);
        vals.swap(v2);
    };

    Result res;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        order();
        if (std::isfinite(vals[n]) && vals[n] - vals[0] < opts.f_tol) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) centroid += pts[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd xr = centroid + (centroid - pts[n]);  // reflection
        const double fr = safe_eval(f, xr);
        if (fr < vals[0]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[n]);  // expansion
            const double fe = safe_eval(f, xe);
            if (fe < fr) {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if (fr < vals[n - 1]) {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            const bool outside = fr < vals[n];
            const Eigen::VectorXd xc =
                outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                        : Eigen::VectorXd(centroid - 0.5 * (centroid - pts[n]));
            const double fc = safe_eval(f, xc);
            if (fc < std::min(fr, vals[n])) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {  // shrink
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = safe_eval(f, pts[i]);
                }
            }
        }
    }
    order();
    res.x = pts[0];
    res.value = vals[0];
    res.iterations = it;
    res.converged = it < opts.max_iterations;
    return res;
}

namespace {

Eigen::VectorXd num_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    for (int i = 0; i < n; ++i) {
        const double h = rel_step * std::max(1.0, std::fabs(x[i]));
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (std::isfinite(fp) && std::isfinite(fm)) ? (fp - fm) / (2.0 * h) : 0.0;
    }
    return g;
}

}  // namespace

Result bfgs(const Objective& f, const Eigen::VectorXd& x0, const BfgsOptions& opts) {
    const int n = static_cast<int>(x0.size());
    Eigen::VectorXd x = x0;
    double fx = safe_eval(f, x);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g = num_gradient(f, x, opts.fd_step);

    Result res;
    res.x = x;
    res.value = fx;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        if (g.norm() < opts.grad_tol * (1.0 + std::fabs(fx))) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd dir = -(H * g);
        if (dir.dot(g) >= 0.0) {  // not a descent direction, reset
            H.setIdentity();
            dir = -g;
        }
        // Armijo backtracking
        double t = 1.0;
        const double slope = g.dot(dir);
        double f_new = kInf;
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            x_new = x + t * dir;
            f_new = safe_eval(f, x_new);
            if (f_new <= fx + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // stuck on a kink or at a minimum

        const Eigen::VectorXd g_new = num_gradient(f, x_new, opts.fd_step);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12) {
            const Eigen::VectorXd Hy = H * yv;
            const double yHy = yv.dot(Hy);
            H += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) -
                 (Hy * s.transpose() + s * Hy.transpose()) / sy;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        if (fx < res.value) {
            res.x = x;
            res.value = fx;
        }
    }
    if (fx <= res.value) {
        res.x = x;
        res.value = fx;
    }
    res.iterations = it;
    return res;
}

}  // namespace qrv::optim
