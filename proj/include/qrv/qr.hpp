#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrv/timeutil.hpp"

namespace qrv::qr {

// Response/design pair for one estimation problem. Returns and volatility
// measures are in percent units throughout.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;  // n x p, intercept column included
    std::vector<std::string> labels;
    std::vector<Date> dates;

    std::size_t n() const { return static_cast<std::size_t>(y.size()); }
    std::size_t p() const { return static_cast<std::size_t>(x.cols()); }
    void validate() const;  // finiteness, n > p, label/shape agreement
};

struct QuantileFit {
    double alpha = 0.0;
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    double objective = 0.0;  // mean check loss at beta
    int iterations = 0;
    double duality_gap = 0.0;
    std::vector<std::string> labels;
    std::optional<Eigen::MatrixXd> cov;   // moving-block bootstrap covariance
    std::optional<Eigen::VectorXd> tstats;
};

struct BootstrapConfig {
    int replications = 999;
    int block_length = 0;  // 0 => ceil(n^(1/3))
    std::uint64_t seed = 1;
};

struct SolverOptions {
    double gap_tol = 1e-8;
    int max_iterations = 200;
};

// rho_alpha(x) = (alpha - 1{x<0}) x
double check_loss(double x, double alpha);

// mean check loss of a residual vector
double mean_check_loss(const Eigen::VectorXd& residuals, double alpha);

// Interior-point (Frisch-Newton, Mehrotra predictor-corrector) minimizer of
// the check-loss objective. Throws RankDeficientDesign / NonConvergence.
QuantileFit fit_lqr(const Dataset& data, double alpha, const SolverOptions& opts = {});

double predict_quantile(const QuantileFit& fit, const Eigen::VectorXd& x_row);

struct QuantileProcess {
    std::vector<QuantileFit> fits;     // one per alpha, ascending
    std::vector<double> alphas;
    std::size_t crossing_rows = 0;     // sample rows with non-monotone fitted quantiles
};

QuantileProcess quantile_process(const Dataset& data, const std::vector<double>& alphas,
                                 const SolverOptions& opts = {});

struct MbbResult {
    Eigen::MatrixXd cov;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd tstats;
    int failed_replications = 0;
    bool degenerate = false;  // near-zero variance (e.g. block_length == n)
};

// Circular moving-block bootstrap covariance of the QR coefficients.
// Deterministic given cfg.seed. Throws NonConvergence if more than 5% of
// replications fail.
MbbResult mbb_covariance(const Dataset& data, double alpha, const BootstrapConfig& cfg,
                         const SolverOptions& opts = {});

// JSON serialization of a fit (alpha, labels, beta, tstats, objective, ...).
std::string fit_to_json(const QuantileFit& fit, std::size_t crossing_rows = 0);

}  // namespace qrv::qr
