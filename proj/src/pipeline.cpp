#include "qrv/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>

#include "qrv/arfima.hpp"
#include "qrv/caviar.hpp"
#include "qrv/csv.hpp"
#include "qrv/errors.hpp"
#include "qrv/implied_vol.hpp"
#include "qrv/model_builder.hpp"
#include "qrv/qr.hpp"
#include "qrv/rng.hpp"
#include "qrv/stats.hpp"
#include "qrv/svg.hpp"

namespace qrv::pipeline {

namespace fs = std::filesystem;

namespace {

void ensure_out_dir(const cfg::RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::ofstream eff(fs::path(cfg.out_dir) / "effective_config.txt", std::ios::binary);
    eff << cfg.to_text();
}

std::string out_path(const cfg::RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

void log_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

MeasureArtifacts run_measures(const cfg::RunConfig& cfg, bool write_outputs) {
    cfg::require_paths(cfg, {"ticks"});
    ingest::TickSchema schema;
    schema.timestamp_column = cfg.timestamp_column;
    schema.price_column = cfg.price_column;
    schema.strict = false;

    MeasureArtifacts art;
    const ingest::TickLoadResult loaded = ingest::load_ticks(cfg.ticks_path, schema);
    if (loaded.report.malformed_rows > 0)
        art.warnings.push_back(std::to_string(loaded.report.malformed_rows) + " malformed tick rows skipped");
    for (const auto& w : loaded.report.warnings) art.warnings.push_back(w);

    ingest::SampleReport sample_report;
    const std::vector<ingest::IntradayGrid> grids =
        ingest::sample_last_tick(loaded.ticks, cfg.session, &sample_report);
    for (const auto& d : sample_report.dropped_days) art.warnings.push_back("dropped day " + d);

    art.daily_returns = ingest::daily_returns(grids);
    art.panel = rm::compute_panel(grids, cfg.jump_significance, &art.warnings);

    if (write_outputs) {
        ensure_out_dir(cfg);
        rm::write_panel_csv(out_path(cfg, "panel.csv"), art.panel);
        ingest::write_daily_returns_csv(out_path(cfg, "daily_returns.csv"), art.daily_returns);
        ingest::write_intraday_csv(out_path(cfg, "intraday_returns.csv"), grids);
    }
    return art;
}

Axis build_axis(const cfg::RunConfig& cfg) {
    MeasureArtifacts art = run_measures(cfg, false);
    log_warnings(art.warnings);

    if (!cfg.implied_vol_path.empty()) {
        cfg::require_paths(cfg, {"implied_vol"});
        art.panel.attach_implied_vol(iv::read_impvol_csv(cfg.implied_vol_path));
    }

    Axis axis;
    axis.panel = std::move(art.panel);
    std::unordered_map<Date, double> ret_by_date;
    for (const auto& [d, r] : art.daily_returns) ret_by_date.emplace(d, r);
    axis.dates.reserve(axis.panel.rows.size());
    for (const auto& row : axis.panel.rows) {
        const auto it = ret_by_date.find(row.day);
        if (it == ret_by_date.end())
            throw DataError("no daily return for panel date " + format_date(row.day));
        axis.dates.push_back(row.day);
        axis.returns.push_back(it->second);
        axis.rv.push_back(row.rv);
        axis.log_rv.push_back(std::log(row.rv));
    }
    return axis;
}

namespace {

models::ModelSpec named_spec(const cfg::RunConfig& cfg, const std::string& name, int horizon) {
    (void)cfg;
    if (fs::exists(name)) {  // a spec file path
        models::ModelSpec s = models::parse_model_spec_file(name);
        s.horizon = horizon;
        return s;
    }
    return models::reference_spec(name, horizon);
}

models::BuiltDataset build_for(const Axis& axis, const models::ModelSpec& spec) {
    if (spec.target == models::Target::Return) {
        std::vector<std::pair<Date, double>> rets;
        rets.reserve(axis.size());
        for (std::size_t i = 0; i < axis.size(); ++i) rets.emplace_back(axis.dates[i], axis.returns[i]);
        return models::build_return_dataset(axis.panel, rets, spec);
    }
    return models::build_rv_dataset(axis.panel, spec);
}

qr::Dataset slice_dataset(const qr::Dataset& full, std::size_t begin, std::size_t end) {
    qr::Dataset out;
    const Eigen::Index b = static_cast<Eigen::Index>(begin);
    const Eigen::Index len = static_cast<Eigen::Index>(end - begin);
    out.y = full.y.segment(b, len);
    out.x = full.x.middleRows(b, len);
    out.labels = full.labels;
    out.dates.assign(full.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                     full.dates.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

// ---- forecasters for the rolling engine (rows = panel day indices) ----

struct LqrForecaster {
    std::shared_ptr<const models::BuiltDataset> built;
    std::size_t offset;  // day index of dataset row 0

    std::vector<double> operator()(std::size_t train_begin, std::size_t train_end,
                                   std::size_t target, const std::vector<double>& alphas) const {
        if (target < offset || train_end <= offset)
            throw InsufficientHistory("targets precede warm-up for " + built->spec.name);
        const std::size_t b = train_begin > offset ? train_begin - offset : 0;
        const std::size_t e = train_end - offset;
        if (e <= b + built->data.p() + 2)
            throw InsufficientHistory("training window too short for " + built->spec.name);
        qr::Dataset window = slice_dataset(built->data, b, e);
        Eigen::VectorXd row = built->data.x.row(static_cast<Eigen::Index>(target - offset));

        // columns with no variation in this window (e.g. JV with no flagged
        // jumps) are unidentified; fit without them and pin their coefficient
        // at zero for the prediction
        std::vector<Eigen::Index> keep;
        for (Eigen::Index j = 0; j < window.x.cols(); ++j) {
            if (j == 0 || window.x.col(j).cwiseAbs().maxCoeff() > 0.0) keep.push_back(j);
        }
        if (keep.size() < static_cast<std::size_t>(window.x.cols())) {
            qr::Dataset reduced;
            reduced.y = window.y;
            reduced.x.resize(window.x.rows(), static_cast<Eigen::Index>(keep.size()));
            Eigen::VectorXd redrow(static_cast<Eigen::Index>(keep.size()));
            for (std::size_t c = 0; c < keep.size(); ++c) {
                reduced.x.col(static_cast<Eigen::Index>(c)) = window.x.col(keep[c]);
                reduced.labels.push_back(window.labels[static_cast<std::size_t>(keep[c])]);
                redrow[static_cast<Eigen::Index>(c)] = row[keep[c]];
            }
            reduced.dates = window.dates;
            window = std::move(reduced);
            row = redrow;
        }

        std::vector<double> out;
        out.reserve(alphas.size());
        for (const double a : alphas) {
            const qr::QuantileFit fit = qr::fit_lqr(window, a);
            out.push_back(qr::predict_quantile(fit, row));
        }
        return out;
    }
};

struct CaviarForecaster {
    const Axis* axis;
    caviar::Form form;
    std::vector<models::Term> exog_terms;
    std::vector<std::string> exog_labels;
    bool exog_lagged = false;
    int horizon = 1;
    std::size_t window_days;
    caviar::FitOptions fit_opts;
    int refit_every = 1;
    // exogenous series on the day axis, NaN in warm-up
    std::shared_ptr<std::vector<std::vector<double>>> exog_series;
    // mutable cache: params per alpha, refreshed every refit_every targets
    std::shared_ptr<std::vector<std::optional<caviar::CaviarParams>>> cache;
    std::shared_ptr<int> calls;

    // anchored non-overlapping h-period returns ending at `target`
    void build_series(std::size_t target, std::vector<double>& rets, Eigen::MatrixXd& exog) const {
        const int h = horizon;
        std::size_t m = window_days / static_cast<std::size_t>(h);
        const std::size_t max_windows = target / static_cast<std::size_t>(h);
        m = std::min(m, max_windows);
        // exog warm-up: window starts must clear every term's lookback
        std::size_t first_ok = 0;
        for (const auto& t : exog_terms)
            first_ok = std::max(first_ok, static_cast<std::size_t>(t.lookback()));
        while (m > 1 && target - m * static_cast<std::size_t>(h) < first_ok) --m;
        if (m < 25) throw InsufficientHistory("caviar window too short at this horizon");
        rets.resize(m);
        exog.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(exog_terms.size()));
        for (std::size_t i = 0; i < m; ++i) {
            // window i (chronological) covers (end-h, end], end = target-(m-1-i)h
            const std::size_t end = target - (m - 1 - i) * static_cast<std::size_t>(h);
            double acc = 0.0;
            for (int j = 0; j < h; ++j) acc += axis->returns[end - static_cast<std::size_t>(j)];
            rets[i] = acc;
            for (std::size_t c = 0; c < exog_terms.size(); ++c)
                exog(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                    (*exog_series)[c][end];
        }
    }

    std::vector<double> operator()(std::size_t train_begin, std::size_t train_end,
                                   std::size_t target, const std::vector<double>& alphas) const {
        (void)train_begin;
        (void)train_end;
        std::vector<double> rets;
        Eigen::MatrixXd exog;
        build_series(target, rets, exog);

        std::vector<double> out(alphas.size());
        const bool refit = (*calls % refit_every) == 0;
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            caviar::CaviarSpec spec;
            spec.form = form;
            spec.exog_labels = exog_labels;
            spec.alpha = alphas[a];
            spec.horizon = horizon;
            spec.exog_lagged = exog_lagged;
            if (refit || !(*cache)[a]) {
                caviar::FitOptions fo = fit_opts;
                fo.seed = derive_seed(fit_opts.seed, target * 131 + a);
                const caviar::CaviarFit fit = caviar::fit_caviar(spec, rets, exog, fo);
                (*cache)[a] = fit.params;
            }
            // refresh the path under cached params, then advance one step
            const std::size_t head = std::max<std::size_t>(1, rets.size() / 10);
            const double q0 =
                stats::quantile(std::span<const double>(rets.data(), head), alphas[a]);
            const caviar::PathResult path =
                caviar::evaluate_quantile_path(spec, *(*cache)[a], rets, exog, q0);
            const caviar::CaviarParams& p = *(*cache)[a];
            const double r_last = rets.back();
            double q_next = p.beta[0] + p.beta[1] * path.q_path.back();
            if (form == caviar::Form::SAV) {
                q_next += p.beta[2] * std::fabs(r_last);
            } else {
                q_next += p.beta[2] * (r_last >= 0 ? r_last : 0.0) +
                          p.beta[3] * (r_last < 0 ? r_last : 0.0);
            }
            const Eigen::Index exog_idx = exog_lagged && exog.rows() >= 2 ? exog.rows() - 2
                                                                         : exog.rows() - 1;
            for (std::size_t c = 0; c < exog_terms.size(); ++c)
                q_next += p.gamma[static_cast<Eigen::Index>(c)] *
                          exog(exog_idx, static_cast<Eigen::Index>(c));
            out[a] = q_next;
        }
        ++(*calls);
        return out;
    }
};

struct ArfimaForecaster {
    const Axis* axis;
    models::Target target_kind;
    int horizon = 1;
    std::size_t window_days;
    arfima::FitOptions fit_opts;
    arfima::ForecastOptions fc_opts;
    int refit_every = 1;
    std::shared_ptr<std::optional<arfima::ArfimaParams>> cache;
    std::shared_ptr<int> calls;

    std::vector<double> operator()(std::size_t, std::size_t, std::size_t target,
                                   const std::vector<double>& alphas) const {
        const std::size_t begin = target + 1 >= window_days ? target + 1 - window_days : 0;
        std::vector<double> history(axis->log_rv.begin() + static_cast<std::ptrdiff_t>(begin),
                                    axis->log_rv.begin() + static_cast<std::ptrdiff_t>(target + 1));
        if ((*calls % refit_every) == 0 || !*cache) {
            arfima::FitOptions fo = fit_opts;
            fo.truncation = std::min<int>(fo.truncation, static_cast<int>(history.size()));
            *cache = arfima::fit_arfima(history, fo).params;
        }
        arfima::ForecastOptions fc = fc_opts;
        fc.seed = derive_seed(fc_opts.seed, target);
        fc.truncation = std::min<int>(fc.truncation, static_cast<int>(history.size()));
        const arfima::MixtureForecast f =
            arfima::forecast_mixture(**cache, history, horizon, alphas, fc);
        std::vector<double> out;
        out.reserve(alphas.size());
        for (const double a : alphas) {
            const auto& src = target_kind == models::Target::Return ? f.return_quantiles
                                                                    : f.rv_quantiles;
            out.push_back(src.at(a));
        }
        ++(*calls);
        return out;
    }
};

Eigen::MatrixXd exog_matrix_full(const Axis& axis, const std::vector<models::Term>& terms) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(axis.size()), static_cast<Eigen::Index>(terms.size()));
    for (std::size_t c = 0; c < terms.size(); ++c) {
        const std::vector<double> v = models::term_series(axis.panel, terms[c]);
        for (std::size_t t = 0; t < axis.size(); ++t)
            m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = v[t];
    }
    return m;
}

}  // namespace

void run_fit(const cfg::RunConfig& cfg, const std::string& model_name, bool plot) {
    const Axis axis = build_axis(cfg);
    ensure_out_dir(cfg);
    const models::ModelSpec spec = named_spec(cfg, model_name, cfg.horizons.front());
    const models::BuiltDataset built = build_for(axis, spec);

    qr::BootstrapConfig bs;
    bs.replications = cfg.bootstrap_reps;
    bs.block_length = cfg.bootstrap_block;
    bs.seed = derive_seed(cfg.seed, 7001);

    for (const double alpha : cfg.alphas) {
        qr::QuantileFit fit = qr::fit_lqr(built.data, alpha);
        const qr::MbbResult mbb = qr::mbb_covariance(built.data, alpha, bs);
        fit.cov = mbb.cov;
        fit.tstats = mbb.tstats;
        char name[64];
        std::snprintf(name, sizeof(name), "fit_%s_a%03d.json", spec.name.c_str(),
                      static_cast<int>(std::lround(alpha * 100)));
        std::ofstream out(out_path(cfg, name), std::ios::binary);
        out << qr::fit_to_json(fit);
    }

    if (plot) {
        // quantile process over a fine grid with bootstrap bands
        std::vector<double> grid;
        for (double a = 0.05; a < 0.951; a += 0.05) grid.push_back(a);
        const qr::QuantileProcess proc = qr::quantile_process(built.data, grid);
        if (proc.crossing_rows > 0)
            std::cerr << "warning: fitted quantiles cross on " << proc.crossing_rows
                      << " sample rows\n";
        std::vector<Eigen::VectorXd> grid_se;
        grid_se.reserve(grid.size());
        for (const double a : grid) grid_se.push_back(qr::mbb_covariance(built.data, a, bs).std_errors);
        for (std::size_t j = 0; j < built.data.p(); ++j) {
            std::vector<double> beta_j, lo, hi;
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const double b = proc.fits[g].beta[static_cast<Eigen::Index>(j)];
                const double se = grid_se[g][static_cast<Eigen::Index>(j)];
                beta_j.push_back(b);
                lo.push_back(b - 1.96 * se);
                hi.push_back(b + 1.96 * se);
            }
            svg::LineChart chart(spec.name + ": " + built.data.labels[j], "alpha", "coefficient");
            chart.add_band(grid, lo, hi);
            chart.add_series(built.data.labels[j], grid, beta_j);
            chart.add_hline(0.0);
            chart.write(out_path(cfg, "qproc_" + spec.name + "_" + std::to_string(j) + ".svg"));
        }
    }
}

void run_fit_caviar(const cfg::RunConfig& cfg, const std::string& form_name) {
    const Axis axis = build_axis(cfg);
    ensure_out_dir(cfg);
    caviar::Form form;
    if (form_name == "SAV") form = caviar::Form::SAV;
    else if (form_name == "AS") form = caviar::Form::AS;
    else throw ConfigError("unknown caviar form '" + form_name + "' (expected SAV or AS)");

    std::vector<models::Term> terms;
    std::vector<std::string> labels;
    for (const auto& t : cfg.caviar_exog) {
        terms.push_back(models::parse_term(t));
        labels.push_back(terms.back().label());
    }
    Eigen::MatrixXd exog = exog_matrix_full(axis, terms);
    // trim the exog warm-up
    std::size_t first_ok = 0;
    for (const auto& t : terms) first_ok = std::max(first_ok, static_cast<std::size_t>(t.lookback()));
    std::vector<double> rets(axis.returns.begin() + static_cast<std::ptrdiff_t>(first_ok),
                             axis.returns.end());
    Eigen::MatrixXd exog_trim = exog.bottomRows(exog.rows() - static_cast<Eigen::Index>(first_ok));

    for (const double alpha : cfg.alphas) {
        caviar::CaviarSpec spec;
        spec.form = form;
        spec.exog_labels = labels;
        spec.alpha = alpha;
        spec.exog_lagged = cfg.caviar_exog_lagged;
        caviar::FitOptions fo;
        fo.seed = derive_seed(cfg.seed, 8101 + static_cast<std::uint64_t>(alpha * 1000));
        fo.n_starts = cfg.caviar_starts;
        fo.n_polish = cfg.caviar_polish;
        const caviar::CaviarFit fit = caviar::fit_caviar(spec, rets, exog_trim, fo);
        log_warnings(fit.warnings);
        const caviar::StdErrorTable se =
            caviar::caviar_std_errors(fit, rets, exog_trim, caviar::default_bandwidth_grid(fit, rets, exog_trim));
        char name[64];
        std::snprintf(name, sizeof(name), "caviar_%s_a%03d.json", form_name.c_str(),
                      static_cast<int>(std::lround(alpha * 100)));
        std::ofstream out(out_path(cfg, name), std::ios::binary);
        out << caviar::fit_to_json(fit, &se);
        if (!se.selected)
            std::cerr << "warning: no stable bandwidth region for " << name << "\n";
    }
}

void run_fit_arfima(const cfg::RunConfig& cfg) {
    const Axis axis = build_axis(cfg);
    ensure_out_dir(cfg);
    const arfima::ArfimaFit fit = arfima::fit_arfima(axis.log_rv);
    std::ofstream out(out_path(cfg, "arfima.json"), std::ios::binary);
    out << arfima::params_to_json(fit);
}

void run_forecast(const cfg::RunConfig& cfg) {
    const Axis axis = build_axis(cfg);
    ensure_out_dir(cfg);
    const arfima::ArfimaFit fit = arfima::fit_arfima(axis.log_rv);
    csv::Writer w({"date", "alpha", "horizon", "q_return", "q_rv_sqrt"});
    const Date last = axis.dates.back();
    for (const int h : cfg.horizons) {
        arfima::ForecastOptions fo;
        fo.n_draws = cfg.arfima_draws;
        fo.seed = derive_seed(cfg.seed, 9200 + static_cast<std::uint64_t>(h));
        const arfima::MixtureForecast f =
            arfima::forecast_mixture(fit.params, axis.log_rv, h, cfg.alphas, fo);
        for (const double a : cfg.alphas)
            w.add_row({format_date(last), csv::format_double(a), std::to_string(h),
                       csv::format_double(f.return_quantiles.at(a)),
                       csv::format_double(f.rv_quantiles.at(a))});
    }
    w.write(out_path(cfg, "forecast.csv"));
    std::ofstream out(out_path(cfg, "arfima.json"), std::ios::binary);
    out << arfima::params_to_json(fit);
}

namespace {

struct BacktestBlock {
    models::Target target;
    int horizon;
    std::vector<eval::ModelEntry> entries;
    std::string benchmark;
};

void emit_report(const cfg::RunConfig& cfg, const std::vector<eval::EvalCell>& cells,
                 BacktestArtifacts& art) {
    csv::Writer w({"target", "model", "alpha", "horizon", "n_oos", "coverage", "mean_tick_loss",
                   "dq_stat", "dq_pval_mc", "dq_pval_asym", "dq_separation",
                   "dm_stat_model_minus_benchmark", "dm_pval", "dm_degenerate", "benchmark"});
    nlohmann::json jcells = nlohmann::json::array();
    for (const auto& c : cells) {
        std::vector<std::string> row;
        row.push_back(c.model.substr(0, c.model.find(':')));
        row.push_back(c.model.substr(c.model.find(':') + 1));
        row.push_back(csv::format_double(c.alpha));
        row.push_back(std::to_string(c.horizon));
        row.push_back(std::to_string(c.n_oos));
        row.push_back(csv::format_double(c.coverage));
        row.push_back(csv::format_double(c.mean_tick_loss));
        if (c.dq) {
            row.push_back(csv::format_double(c.dq->lr_stat));
            row.push_back(csv::format_double(c.dq->p_value_mc));
            row.push_back(csv::format_double(c.dq->p_value_asymptotic));
            row.push_back(c.dq->separation ? "1" : "0");
        } else {
            row.insert(row.end(), {"", "", "", ""});
        }
        if (c.dm_vs_bench) {
            row.push_back(csv::format_double(c.dm_vs_bench->stat));
            row.push_back(csv::format_double(c.dm_vs_bench->p_value));
            row.push_back("0");
        } else {
            row.insert(row.end(), {"", "", c.dm_degenerate ? "1" : "0"});
        }
        row.push_back(c.benchmark.substr(c.benchmark.find(':') + 1));
        w.add_row(row);

        nlohmann::json jc;
        jc["model"] = c.model;
        jc["alpha"] = c.alpha;
        jc["horizon"] = c.horizon;
        jc["n_oos"] = c.n_oos;
        jc["coverage"] = c.coverage;
        jc["mean_tick_loss"] = c.mean_tick_loss;
        if (c.dq) {
            jc["dq"] = {{"lr_stat", c.dq->lr_stat},
                        {"p_value_mc", c.dq->p_value_mc},
                        {"p_value_asymptotic", c.dq->p_value_asymptotic},
                        {"separation", c.dq->separation}};
        }
        if (c.dm_vs_bench) {
            jc["dm"] = {{"stat", c.dm_vs_bench->stat},
                        {"p_value", c.dm_vs_bench->p_value},
                        {"convention", "positive when the model's tick loss exceeds the benchmark's"}};
        }
        jc["dm_degenerate"] = c.dm_degenerate;
        jc["benchmark"] = c.benchmark;
        jcells.push_back(jc);
    }
    art.report_csv = out_path(cfg, "backtest_report.csv");
    art.report_json = out_path(cfg, "backtest_report.json");
    w.write(art.report_csv);
    nlohmann::json j;
    j["cells"] = jcells;
    j["seed"] = cfg.seed;
    std::ofstream out(art.report_json, std::ios::binary);
    out << j.dump(2) << "\n";
}

}  // namespace

BacktestArtifacts run_backtest(const cfg::RunConfig& cfg, bool plot) {
    const Axis axis = build_axis(cfg);
    ensure_out_dir(cfg);
    BacktestArtifacts art;

    std::vector<models::Term> caviar_terms;
    std::vector<std::string> caviar_labels;
    for (const auto& t : cfg.caviar_exog) {
        caviar_terms.push_back(models::parse_term(t));
        caviar_labels.push_back(caviar_terms.back().label());
    }
    auto caviar_exog_series = std::make_shared<std::vector<std::vector<double>>>();
    for (const auto& t : caviar_terms)
        caviar_exog_series->push_back(models::term_series(axis.panel, t));

    for (const int h : cfg.horizons) {
        for (const models::Target kind : {models::Target::Return, models::Target::RvSqrt}) {
            const bool is_return = kind == models::Target::Return;
            const std::vector<std::string>& names = is_return ? cfg.return_models : cfg.rv_models;
            if (names.empty()) continue;
            const std::string prefix = is_return ? "ret:" : "rv:";

            std::vector<eval::ModelEntry> entries;
            for (const auto& name : names) {
                models::ModelSpec spec = named_spec(cfg, name, h);
                auto built = std::make_shared<models::BuiltDataset>(build_for(axis, spec));
                int lookback = 0;
                for (const auto& term : spec.regressors)
                    lookback = std::max(lookback, term.lookback());
                entries.push_back(
                    {prefix + name, LqrForecaster{built, static_cast<std::size_t>(lookback)}});
            }
            if (is_return) {
                for (const auto& form_name : cfg.caviar_forms) {
                    CaviarForecaster f;
                    f.axis = &axis;
                    f.form = form_name == "AS" ? caviar::Form::AS : caviar::Form::SAV;
                    f.exog_terms = caviar_terms;
                    f.exog_labels = caviar_labels;
                    f.exog_lagged = cfg.caviar_exog_lagged;
                    f.horizon = h;
                    f.window_days = cfg.window;
                    f.fit_opts.seed = derive_seed(cfg.seed, 501 + static_cast<std::uint64_t>(h));
                    f.fit_opts.n_starts = cfg.caviar_starts;
                    f.fit_opts.n_polish = cfg.caviar_polish;
                    f.refit_every = cfg.refit_every;
                    f.exog_series = caviar_exog_series;
                    f.cache = std::make_shared<std::vector<std::optional<caviar::CaviarParams>>>(
                        cfg.alphas.size());
                    f.calls = std::make_shared<int>(0);
                    const std::string tag = caviar_terms.empty() ? form_name : "R" + form_name;
                    entries.push_back({prefix + tag, f});
                }
            }
            if (cfg.arfima_benchmark) {
                ArfimaForecaster f;
                f.axis = &axis;
                f.target_kind = kind;
                f.horizon = h;
                f.window_days = cfg.window;
                f.fc_opts.n_draws = cfg.arfima_draws;
                f.fc_opts.seed = derive_seed(cfg.seed, 601 + static_cast<std::uint64_t>(h));
                f.refit_every = cfg.refit_every;
                f.cache = std::make_shared<std::optional<arfima::ArfimaParams>>();
                f.calls = std::make_shared<int>(0);
                entries.push_back({prefix + "ARFIMA", f});
            }

            eval::RollingOptions opts;
            opts.scheme.window = cfg.window;
            opts.scheme.n_oos = cfg.n_oos;
            opts.alphas = cfg.alphas;
            opts.horizon = h;
            opts.stride = static_cast<std::size_t>(h);
            opts.dq.n_lags = cfg.dq_lags;
            opts.dq.mc_reps = cfg.mc_reps;
            opts.dq.seed = derive_seed(cfg.seed, 701 + static_cast<std::uint64_t>(h));
            opts.run_dq = h == 1;

            const std::size_t n_rows = axis.size() - static_cast<std::size_t>(h);
            auto realized_of = [&axis, h, kind](std::size_t t) {
                return models::direct_target(kind == models::Target::Return ? axis.returns : axis.rv,
                                             t, h, kind);
            };
            const std::string bench = prefix + (is_return ? cfg.benchmark_return : cfg.benchmark_rv);
            const eval::RollingReport rep =
                eval::rolling_forecast_eval(entries, bench, n_rows, realized_of, opts);
            art.cells.insert(art.cells.end(), rep.cells.begin(), rep.cells.end());

            if (plot) {
                svg::LineChart chart((is_return ? std::string("returns h=") : std::string("rv h=")) +
                                         std::to_string(h) + ": coverage vs nominal",
                                     "alpha", "coverage");
                const std::vector<std::string> palette = {"#1f77b4", "#d62728", "#2ca02c",
                                                          "#9467bd", "#ff7f0e", "#8c564b"};
                for (std::size_t m = 0; m < entries.size(); ++m) {
                    std::vector<double> cov;
                    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
                        for (const auto& c : rep.cells)
                            if (c.model == entries[m].name && c.alpha == cfg.alphas[a])
                                cov.push_back(c.coverage);
                    }
                    chart.add_series(entries[m].name, cfg.alphas, cov, palette[m % palette.size()]);
                }
                chart.add_series("nominal", cfg.alphas, cfg.alphas, "#000000");
                chart.write(out_path(cfg, std::string("coverage_") + (is_return ? "ret" : "rv") +
                                              "_h" + std::to_string(h) + ".svg"));
            }
        }
    }

    emit_report(cfg, art.cells, art);
    return art;
}

void run_impvol(const cfg::RunConfig& cfg) {
    cfg::require_paths(cfg, {"quotes", "rates"});
    ensure_out_dir(cfg);
    const std::vector<iv::OptionQuote> quotes = iv::read_quotes_csv(cfg.quotes_path, cfg.rates_path);
    std::vector<std::string> warnings;
    iv::PipelineOptions opts;
    const std::vector<iv::ImvPoint> series = iv::compute_impvol_series(quotes, opts, &warnings);
    log_warnings(warnings);
    iv::write_impvol_csv(out_path(cfg, "impvol_30d.csv"), series);
}

}  // namespace qrv::pipeline
