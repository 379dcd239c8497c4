#pragma once

#include <string>
#include <vector>

#include "qrv/config.hpp"
#include "qrv/evaluation.hpp"
#include "qrv/realized.hpp"

namespace qrv::pipeline {

// Common day axis shared by every model in a run: filtered measure panel,
// aligned daily returns and log-RV.
struct Axis {
    rm::MeasurePanel panel;
    std::vector<Date> dates;
    std::vector<double> returns;
    std::vector<double> rv;
    std::vector<double> log_rv;

    std::size_t size() const { return dates.size(); }
};

struct MeasureArtifacts {
    rm::MeasurePanel panel;
    std::vector<std::pair<Date, double>> daily_returns;
    std::vector<std::string> warnings;
};

// ticks -> grids -> panel (+ CSV artifacts when write_outputs)
MeasureArtifacts run_measures(const cfg::RunConfig& cfg, bool write_outputs);

// panel/returns ready for modeling (recomputes measures from ticks, attaches
// the implied-vol series when configured)
Axis build_axis(const cfg::RunConfig& cfg);

// fit-returns / fit-rv: writes fit JSON per alpha and, when plot is set, the
// quantile-process coefficient charts with bootstrap bands.
void run_fit(const cfg::RunConfig& cfg, const std::string& model_name, bool plot);

void run_fit_caviar(const cfg::RunConfig& cfg, const std::string& form_name);

void run_fit_arfima(const cfg::RunConfig& cfg);

// ARFIMA mixture quantile forecasts from the end of the sample, all
// configured horizons; CSV (date, alpha, horizon, q_return, q_rv_sqrt).
void run_forecast(const cfg::RunConfig& cfg);

struct BacktestArtifacts {
    std::vector<eval::EvalCell> cells;
    std::string report_csv;   // path
    std::string report_json;  // path
};

BacktestArtifacts run_backtest(const cfg::RunConfig& cfg, bool plot);

void run_impvol(const cfg::RunConfig& cfg);

}  // namespace qrv::pipeline
