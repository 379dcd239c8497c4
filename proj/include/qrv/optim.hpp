#pragma once

#include <Eigen/Dense>

#include <functional>

namespace qrv::optim {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Result {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct NelderMeadOptions {
    int max_iterations = 500;
    double f_tol = 1e-10;            // simplex function-value spread
    double initial_step = 0.25;      // per-coordinate simplex offset
};

// Downhill simplex. Objective may return +inf for invalid points.
Result nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const NelderMeadOptions& opts = {});

struct BfgsOptions {
    int max_iterations = 200;
    double grad_tol = 1e-7;
    double fd_step = 1e-6;  // relative central-difference step
};

// BFGS with central-difference gradients and Armijo backtracking. Suitable
// for objectives that are differentiable almost everywhere; stalls are
// reported through `converged`, the best point found is always returned.
Result bfgs(const Objective& f, const Eigen::VectorXd& x0, const BfgsOptions& opts = {});

}  // namespace qrv::optim
