#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "qrv/data_ingest.hpp"
#include "qrv/timeutil.hpp"

namespace qrv::cfg {

// Line-oriented "key = value" configuration with [section] headers.
struct RunConfig {
    // [paths]
    std::string ticks_path;
    std::string quotes_path;
    std::string rates_path;
    std::string implied_vol_path;  // ready-made series (e.g. an index)
    std::string out_dir = "out";

    // [session]
    ingest::SessionSpec session;
    std::string timestamp_column = "timestamp";
    std::string price_column = "price";

    // [measures]
    double jump_significance = 0.001;

    // [models]
    std::vector<std::string> return_models = {"LQR1", "LQR2", "LQR3"};
    std::vector<std::string> rv_models = {"HARQ1", "HARQ2", "HARQ3"};
    std::vector<std::string> caviar_forms = {"SAV", "AS"};
    std::vector<std::string> caviar_exog;  // regressor terms for realized CAViaR
    bool caviar_exog_lagged = false;
    std::string benchmark_return = "LQR2";
    std::string benchmark_rv = "HARQ3";
    bool arfima_benchmark = true;

    // [run]
    std::vector<double> alphas = {0.05, 0.10, 0.50, 0.90, 0.95};
    std::vector<int> horizons = {1, 5, 10};
    std::size_t window = 1000;
    std::size_t n_oos = 500;
    std::uint64_t seed = 42;
    int mc_reps = 9999;
    int dq_lags = 5;
    int bootstrap_reps = 999;
    int bootstrap_block = 0;  // 0 = ceil(n^(1/3))
    int caviar_starts = 10000;
    int caviar_polish = 10;
    int arfima_draws = 10000;
    int refit_every = 1;  // recursive/simulated models refit cadence (targets)

    std::string source_path;  // where this config was loaded from

    // Serializes the fully-resolved configuration (defaults included).
    std::string to_text() const;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<inline>");

// Existence checks for the inputs a subcommand needs; throws ConfigError
// naming the missing path.
void require_paths(const RunConfig& cfg, const std::vector<std::string>& keys);

}  // namespace qrv::cfg
