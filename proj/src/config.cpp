#include "qrv/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qrv/errors.hpp"

namespace qrv::cfg {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad number '" + item + "' for " + key);
        }
    }
    return out;
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("bad boolean '" + s + "' for " + key);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    cfg.source_path = origin;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string l = trim(line);
        if (l.empty() || l[0] == '#' || l[0] == ';') continue;
        if (l.front() == '[' && l.back() == ']') {
            section = trim(l.substr(1, l.size() - 2));
            continue;
        }
        const std::size_t eq = l.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(l.substr(0, eq));
        const std::string val = trim(l.substr(eq + 1));
        const std::string full = section.empty() ? key : section + "." + key;

        try {
            if (full == "paths.ticks") cfg.ticks_path = val;
            else if (full == "paths.quotes") cfg.quotes_path = val;
            else if (full == "paths.rates") cfg.rates_path = val;
            else if (full == "paths.implied_vol") cfg.implied_vol_path = val;
            else if (full == "paths.out") cfg.out_dir = val;
            else if (full == "session.open") {
                const auto t = parse_time_of_day(val);
                if (!t) throw ConfigError("bad time '" + val + "'");
                cfg.session.open_ms = *t;
            } else if (full == "session.close") {
                const auto t = parse_time_of_day(val);
                if (!t) throw ConfigError("bad time '" + val + "'");
                cfg.session.close_ms = *t;
            } else if (full == "session.bar_minutes") {
                cfg.session.bar_ms = std::stoi(val) * 60000;
            } else if (full == "session.min_ticks") {
                cfg.session.min_ticks_per_day = static_cast<std::size_t>(std::stoul(val));
            } else if (full == "session.exclude") {
                for (const auto& ds : split_list(val)) {
                    const auto d = parse_date(ds);
                    if (!d) throw ConfigError("bad date '" + ds + "'");
                    cfg.session.excluded_dates.insert(*d);
                }
            } else if (full == "session.timestamp_column") {
                cfg.timestamp_column = val;
            } else if (full == "session.price_column") {
                cfg.price_column = val;
            } else if (full == "measures.jump_significance") {
                cfg.jump_significance = std::stod(val);
            } else if (full == "models.return_models") {
                cfg.return_models = split_list(val);
            } else if (full == "models.rv_models") {
                cfg.rv_models = split_list(val);
            } else if (full == "models.caviar_forms") {
                cfg.caviar_forms = split_list(val);
            } else if (full == "models.caviar_exog") {
                cfg.caviar_exog = split_list(val);
            } else if (full == "models.caviar_exog_lagged") {
                cfg.caviar_exog_lagged = parse_bool(val, full);
            } else if (full == "models.benchmark_return") {
                cfg.benchmark_return = val;
            } else if (full == "models.benchmark_rv") {
                cfg.benchmark_rv = val;
            } else if (full == "models.arfima_benchmark") {
                cfg.arfima_benchmark = parse_bool(val, full);
            } else if (full == "run.alphas") {
                cfg.alphas = parse_doubles(val, full);
            } else if (full == "run.horizons") {
                cfg.horizons.clear();
                for (const double h : parse_doubles(val, full)) cfg.horizons.push_back(static_cast<int>(h));
            } else if (full == "run.window") {
                cfg.window = static_cast<std::size_t>(std::stoul(val));
            } else if (full == "run.n_oos") {
                cfg.n_oos = static_cast<std::size_t>(std::stoul(val));
            } else if (full == "run.seed") {
                cfg.seed = std::stoull(val);
            } else if (full == "run.mc_reps") {
                cfg.mc_reps = std::stoi(val);
            } else if (full == "run.dq_lags") {
                cfg.dq_lags = std::stoi(val);
            } else if (full == "run.bootstrap_reps") {
                cfg.bootstrap_reps = std::stoi(val);
            } else if (full == "run.bootstrap_block") {
                cfg.bootstrap_block = std::stoi(val);
            } else if (full == "run.caviar_starts") {
                cfg.caviar_starts = std::stoi(val);
            } else if (full == "run.caviar_polish") {
                cfg.caviar_polish = std::stoi(val);
            } else if (full == "run.arfima_draws") {
                cfg.arfima_draws = std::stoi(val);
            } else if (full == "run.refit_every") {
                cfg.refit_every = std::stoi(val);
            } else {
                throw ConfigError("unknown key '" + full + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }

    // invariants
    if (cfg.alphas.empty()) throw ConfigError("at least one alpha required");
    for (std::size_t i = 0; i < cfg.alphas.size(); ++i) {
        if (!(cfg.alphas[i] > 0.0 && cfg.alphas[i] < 1.0))
            throw ConfigError("alphas must lie strictly inside (0,1)");
        if (i > 0 && cfg.alphas[i] <= cfg.alphas[i - 1])
            throw ConfigError("alphas must be strictly increasing");
    }
    for (const int h : cfg.horizons)
        if (h < 1) throw ConfigError("horizons must be >= 1");
    if (!(cfg.jump_significance > 0.0 && cfg.jump_significance < 1.0))
        throw ConfigError("jump_significance must lie in (0,1)");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

void require_paths(const RunConfig& cfg, const std::vector<std::string>& keys) {
    auto check = [](const std::string& key, const std::string& path) {
        if (path.empty()) throw ConfigError("config is missing paths." + key);
        if (!std::filesystem::exists(path))
            throw ConfigError("paths." + key + " does not exist: " + path);
    };
    for (const auto& k : keys) {
        if (k == "ticks") check(k, cfg.ticks_path);
        else if (k == "quotes") check(k, cfg.quotes_path);
        else if (k == "rates") check(k, cfg.rates_path);
        else if (k == "implied_vol") check(k, cfg.implied_vol_path);
        else throw ConfigError("unknown path key " + k);
    }
}

std::string RunConfig::to_text() const {
    std::ostringstream os;
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
        return s;
    };
    auto join_d = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::ostringstream t;
            t << v[i];
            s += (i ? ", " : "") + t.str();
        }
        return s;
    };
    auto fmt_time = [](std::int32_t ms) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%02d:%02d", ms / 3600000, (ms / 60000) % 60);
        return std::string(buf);
    };
    os << "[paths]\n";
    os << "ticks = " << ticks_path << "\n";
    os << "quotes = " << quotes_path << "\n";
    os << "rates = " << rates_path << "\n";
    os << "implied_vol = " << implied_vol_path << "\n";
    os << "out = " << out_dir << "\n\n";
    os << "[session]\n";
    os << "open = " << fmt_time(session.open_ms) << "\n";
    os << "close = " << fmt_time(session.close_ms) << "\n";
    os << "bar_minutes = " << session.bar_ms / 60000 << "\n";
    os << "min_ticks = " << session.min_ticks_per_day << "\n";
    os << "timestamp_column = " << timestamp_column << "\n";
    os << "price_column = " << price_column << "\n";
    if (!session.excluded_dates.empty()) {
        os << "exclude = ";
        bool first = true;
        for (const Date d : session.excluded_dates) {
            os << (first ? "" : ", ") << format_date(d);
            first = false;
        }
        os << "\n";
    }
    os << "\n[measures]\n";
    os << "jump_significance = " << jump_significance << "\n";
    os << "\n[models]\n";
    os << "return_models = " << join(return_models) << "\n";
    os << "rv_models = " << join(rv_models) << "\n";
    os << "caviar_forms = " << join(caviar_forms) << "\n";
    os << "caviar_exog = " << join(caviar_exog) << "\n";
    os << "caviar_exog_lagged = " << (caviar_exog_lagged ? "true" : "false") << "\n";
    os << "benchmark_return = " << benchmark_return << "\n";
    os << "benchmark_rv = " << benchmark_rv << "\n";
    os << "arfima_benchmark = " << (arfima_benchmark ? "true" : "false") << "\n";
    os << "\n[run]\n";
    os << "alphas = " << join_d(alphas) << "\n";
    os << "horizons = ";
    for (std::size_t i = 0; i < horizons.size(); ++i) os << (i ? ", " : "") << horizons[i];
    os << "\n";
    os << "window = " << window << "\n";
    os << "n_oos = " << n_oos << "\n";
    os << "seed = " << seed << "\n";
    os << "mc_reps = " << mc_reps << "\n";
    os << "dq_lags = " << dq_lags << "\n";
    os << "bootstrap_reps = " << bootstrap_reps << "\n";
    os << "bootstrap_block = " << bootstrap_block << "\n";
    os << "caviar_starts = " << caviar_starts << "\n";
    os << "caviar_polish = " << caviar_polish << "\n";
    os << "arfima_draws = " << arfima_draws << "\n";
    os << "refit_every = " << refit_every << "\n";
    return os.str();
}

}  // namespace qrv::cfg
