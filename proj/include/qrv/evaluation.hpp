#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qrv::eval {

struct HitSeries {
    double alpha = 0.0;
    std::vector<bool> hits;            // hits[t] == (observed[t] <= quantile_path[t])
    std::vector<double> quantile_path;
    int horizon = 1;
    double coverage_hat = 0.0;
};

HitSeries hits(const std::vector<double>& observed, const std::vector<double>& quantile_path,
               double alpha, int horizon = 1);

struct DQResult {
    double lr_stat = 0.0;
    double p_value_mc = 1.0;
    double p_value_asymptotic = 1.0;
    double coverage_hat = 0.0;
    int lags = 5;
    bool separation = false;  // ridge-stabilized logit was needed
};

struct DQOptions {
    int n_lags = 5;
    int mc_reps = 9999;
    std::uint64_t seed = 1;
};

// Dynamic-quantile LR test in a logistic regression of the hit on a
// constant, lagged hits and lagged quantiles. Only defined for one-step
// forecasts (MultiStepRefused otherwise). The MC p-value redraws hits iid
// Bernoulli(alpha) against the observed (fixed) quantile path.
DQResult dq_test(const HitSeries& hs, const DQOptions& opts = {});

std::vector<double> tick_loss_series(const std::vector<double>& observed,
                                     const std::vector<double>& quantile_path, double alpha);

struct DMResult {
    double stat = 0.0;
    double p_value = 1.0;
    double mean_loss_a = 0.0;
    double mean_loss_b = 0.0;
    int nw_lags = 0;
};

// Diebold-Mariano equal-predictive-ability test; Newey-West variance with
// horizon-1 lags by default (nw_lags < 0 => that default).
DMResult dm_test(const std::vector<double>& loss_a, const std::vector<double>& loss_b,
                 int horizon, int nw_lags = -1);

// ---- rolling out-of-sample evaluation ----

struct WindowScheme {
    std::size_t window = 1000;  // fixed estimation window (rows)
    std::size_t n_oos = 500;    // out-of-sample targets
};

// A forecaster is fitted on rows [train_begin, train_end) of its own data
// representation and must return the alpha-quantile forecasts for row
// `target`. Rows index a common day axis supplied by the caller.
using Forecaster = std::function<std::vector<double>(
    std::size_t train_begin, std::size_t train_end, std::size_t target,
    const std::vector<double>& alphas)>;

struct ModelEntry {
    std::string name;
    Forecaster forecaster;
};

struct EvalCell {
    std::string model;
    double alpha = 0.0;
    int horizon = 1;
    std::size_t n_oos = 0;
    double coverage = 0.0;
    double mean_tick_loss = 0.0;
    std::optional<DQResult> dq;           // h == 1 only
    std::optional<DMResult> dm_vs_bench;  // absent for the benchmark itself
    std::string benchmark;
    bool dm_degenerate = false;
};

struct RollingOptions {
    WindowScheme scheme;
    std::vector<double> alphas;
    int horizon = 1;
    std::size_t stride = 1;  // distance between consecutive targets (h for h>1)
    DQOptions dq;
    bool run_dq = true;
};

struct RollingReport {
    std::vector<EvalCell> cells;
    std::vector<std::size_t> target_rows;
    // forecasts[model][alpha_idx][i] for target_rows[i]
    std::vector<std::vector<std::vector<double>>> forecasts;
    std::vector<double> realized;  // observed target per target row
};

// Fixed-window rolling evaluation of every model against the named
// benchmark. `realized_of` maps a target row to the realized target value.
RollingReport rolling_forecast_eval(const std::vector<ModelEntry>& models,
                                    const std::string& benchmark_name,
                                    std::size_t n_rows,
                                    const std::function<double(std::size_t)>& realized_of,
                                    const RollingOptions& opts);

}  // namespace qrv::eval
