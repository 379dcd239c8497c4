#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qrv::caviar {

enum class Form { SAV, AS };  // symmetric absolute value / asymmetric slope

struct CaviarSpec {
    Form form = Form::SAV;
    std::vector<std::string> exog_labels;  // empty => baseline CAViaR
    double alpha = 0.05;
    int horizon = 1;
    // If true, exogenous regressors enter with one extra lag (x_{t-1} in the
    // q_{t+1} update) instead of x_t.
    bool exog_lagged = false;

    int n_beta() const { return form == Form::SAV ? 3 : 4; }
    std::size_t n_params() const { return static_cast<std::size_t>(n_beta()) + exog_labels.size(); }
};

struct CaviarParams {
    Eigen::VectorXd beta;   // 3 (SAV) or 4 (AS)
    Eigen::VectorXd gamma;  // one per exogenous regressor

    Eigen::VectorXd packed() const;
    static CaviarParams unpack(const CaviarSpec& spec, const Eigen::VectorXd& v);
};

struct PathResult {
    std::vector<double> q_path;  // length n, q_path[0] = q0
    double objective = 0.0;      // mean check loss of r_t - q_t over t >= 1
};

// Runs the quantile recursion. exog is n x k (k may be 0). Throws
// ExplosivePath when |q_t| exceeds 1e10.
PathResult evaluate_quantile_path(const CaviarSpec& spec, const CaviarParams& params,
                                  const std::vector<double>& returns, const Eigen::MatrixXd& exog,
                                  double q0);

struct FitOptions {
    std::uint64_t seed = 1;
    int n_starts = 10000;       // random parameter draws
    int n_polish = 10;          // best starts polished
    int simplex_iterations = 500;
    int quasi_newton_iterations = 200;
};

struct CaviarFit {
    CaviarSpec spec;
    CaviarParams params;
    double objective = 0.0;
    std::vector<double> q_path;
    double q0 = 0.0;
    std::uint64_t seed = 0;
    int starts = 0;
    std::vector<std::string> warnings;
};

// Multi-start estimation: uniform random draws, the best few polished with
// a simplex then quasi-Newton on the (a.e. differentiable) objective.
// Deterministic given opts.seed.
CaviarFit fit_caviar(const CaviarSpec& spec, const std::vector<double>& returns,
                     const Eigen::MatrixXd& exog, const FitOptions& opts = {});

struct StdErrorTable {
    std::vector<double> bandwidths;
    std::vector<Eigen::VectorXd> std_errors;      // one vector per bandwidth
    std::optional<std::size_t> selected;          // none => no stable region
    std::optional<Eigen::VectorXd> selected_se;
};

// Engle-Manganelli sandwich standard errors over a bandwidth grid; selects
// the midpoint of the widest sub-grid on which every component moves < 10%
// between neighbours. An empty `selected` reports NoStableRegion.
StdErrorTable caviar_std_errors(const CaviarFit& fit, const std::vector<double>& returns,
                                const Eigen::MatrixXd& exog,
                                const std::vector<double>& bandwidth_grid);

// Default bandwidth grid: multiples of sigma(residual) * n^(-1/3).
std::vector<double> default_bandwidth_grid(const CaviarFit& fit, const std::vector<double>& returns,
                                           const Eigen::MatrixXd& exog);

// Recursive gradient of q_t with respect to the packed parameter vector,
// rows t = 0..n-1 (row 0 is zero: q0 does not depend on the parameters).
Eigen::MatrixXd quantile_path_gradient(const CaviarSpec& spec, const CaviarParams& params,
                                       const std::vector<double>& returns,
                                       const Eigen::MatrixXd& exog, double q0);

std::string fit_to_json(const CaviarFit& fit, const StdErrorTable* se = nullptr);

}  // namespace qrv::caviar
