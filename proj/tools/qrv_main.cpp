#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "qrv/config.hpp"
#include "qrv/errors.hpp"
#include "qrv/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool has_seed = false;
    bool plot = false;
};

qrv::cfg::RunConfig load_config(const CommonArgs& args) {
    qrv::cfg::RunConfig cfg = qrv::cfg::parse_config_file(args.config_path);
    if (!args.out_override.empty()) cfg.out_dir = args.out_override;
    if (args.has_seed) cfg.seed = args.seed_override;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration file")->required();
    cmd->add_option("--out", args.out_override, "output directory override");
    cmd->add_option("--seed", args.seed_override, "seed override")
        ->each([&args](const std::string&) { args.has_seed = true; });
    cmd->add_flag("--plot", args.plot, "emit SVG charts");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantile models for futures returns and realized volatility"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string fit_model;
    std::string caviar_form = "SAV";

    CLI::App* measures = app.add_subcommand("measures", "build the daily realized-measure panel");
    add_common(measures, args);

    CLI::App* fit_returns = app.add_subcommand("fit-returns", "fit a return quantile model");
    add_common(fit_returns, args);
    fit_returns->add_option("--model", fit_model, "model name (LQR1..LQR3) or spec file")->required();

    CLI::App* fit_rv = app.add_subcommand("fit-rv", "fit a realized-volatility quantile model");
    add_common(fit_rv, args);
    fit_rv->add_option("--model", fit_model, "model name (HARQ1..HARQ3, optional W suffix) or spec file")
        ->required();

    CLI::App* fit_caviar = app.add_subcommand("fit-caviar", "fit a CAViaR model");
    add_common(fit_caviar, args);
    fit_caviar->add_option("--form", caviar_form, "SAV or AS");

    CLI::App* fit_arfima = app.add_subcommand("fit-arfima", "fit the log-RV ARFIMA model");
    add_common(fit_arfima, args);

    CLI::App* forecast = app.add_subcommand("forecast", "mixture quantile forecasts from the sample end");
    add_common(forecast, args);

    CLI::App* backtest = app.add_subcommand("backtest", "rolling out-of-sample quantile backtest");
    add_common(backtest, args);

    CLI::App* impvol = app.add_subcommand("impvol", "synthesize the 30-day implied-vol series");
    add_common(impvol, args);

    CLI11_PARSE(app, argc, argv);

    try {
        const qrv::cfg::RunConfig cfg = load_config(args);
        if (measures->parsed()) {
            qrv::pipeline::run_measures(cfg, true);
        } else if (fit_returns->parsed() || fit_rv->parsed()) {
            qrv::pipeline::run_fit(cfg, fit_model, args.plot);
        } else if (fit_caviar->parsed()) {
            qrv::pipeline::run_fit_caviar(cfg, caviar_form);
        } else if (fit_arfima->parsed()) {
            qrv::pipeline::run_fit_arfima(cfg);
        } else if (forecast->parsed()) {
            qrv::pipeline::run_forecast(cfg);
        } else if (backtest->parsed()) {
            qrv::pipeline::run_backtest(cfg, args.plot);
        } else if (impvol->parsed()) {
            qrv::pipeline::run_impvol(cfg);
        }
    } catch (const qrv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const qrv::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const qrv::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
