#include "qrv/model_builder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "qrv/csv.hpp"
#include "qrv/errors.hpp"

namespace qrv::models {

namespace {

const char* field_name(Field f) {
    switch (f) {
        case Field::Intercept: return "const";
        case Field::RvSqrt: return "rv";
        case Field::IvSqrt: return "iv";
        case Field::JvSqrt: return "jv";
        case Field::RsMinusSqrt: return "rs_minus";
        case Field::RsPlusSqrt: return "rs_plus";
        case Field::ImpliedVol: return "impvol";
        case Field::WednesdayDummy: return "wednesday";
    }
    return "?";
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::string Term::label() const {
    std::string s = field_name(field);
    if (rolling > 1) s = "mean" + std::to_string(rolling) + "(" + s + ")";
    if (lag > 0) s = "lag" + std::to_string(lag) + "(" + s + ")";
    return s;
}

void ModelSpec::validate() const {
    if (name.empty()) throw ConfigError("model spec needs a name");
    if (horizon < 1) throw ConfigError("model horizon must be >= 1");
    if (regressors.empty() || regressors.front().field != Field::Intercept)
        throw ConfigError("model spec must start with the intercept");
    for (const auto& t : regressors) {
        if (t.lag < 0 || t.rolling < 1) throw ConfigError("bad lag/rolling in term " + t.label());
        if (t.field == Field::Intercept && (t.lag != 0 || t.rolling != 1))
            throw ConfigError("intercept cannot be lagged or averaged");
    }
}

ModelSpec reference_spec(const std::string& name, int horizon) {
    auto T = [](Field f, int lag = 0, int rolling = 1) { return Term{f, lag, rolling}; };
    std::string base = name;
    bool wednesday = false;
    if (base.size() > 1 && base.back() == 'W') {
        wednesday = true;
        base.pop_back();
    }
    ModelSpec s;
    s.name = name;
    s.horizon = horizon;
    if (base == "LQR1") {
        s.target = Target::Return;
        s.regressors = {T(Field::Intercept), T(Field::RvSqrt)};
    } else if (base == "LQR2") {
        s.target = Target::Return;
        s.regressors = {T(Field::Intercept), T(Field::IvSqrt), T(Field::JvSqrt), T(Field::ImpliedVol)};
    } else if (base == "LQR3") {
        s.target = Target::Return;
        s.regressors = {T(Field::Intercept), T(Field::RsPlusSqrt), T(Field::RsMinusSqrt),
                        T(Field::ImpliedVol)};
    } else if (base == "HARQ1") {
        s.target = Target::RvSqrt;
        s.regressors = {T(Field::Intercept), T(Field::RvSqrt), T(Field::RvSqrt, 0, 5),
                        T(Field::RvSqrt, 0, 22)};
    } else if (base == "HARQ2") {
        s.target = Target::RvSqrt;
        s.regressors = {T(Field::Intercept), T(Field::RsPlusSqrt), T(Field::RsMinusSqrt),
                        T(Field::RvSqrt, 0, 5), T(Field::RvSqrt, 0, 22), T(Field::ImpliedVol)};
    } else if (base == "HARQ3") {
        s.target = Target::RvSqrt;
        s.regressors = {T(Field::Intercept), T(Field::IvSqrt), T(Field::IvSqrt, 0, 5),
                        T(Field::IvSqrt, 0, 22), T(Field::JvSqrt), T(Field::ImpliedVol)};
    } else {
        throw ConfigError("unknown model name '" + name +
                          "' (expected LQR1..LQR3, HARQ1..HARQ3, optional trailing W)");
    }
    if (wednesday) s.regressors.push_back(T(Field::WednesdayDummy));
    s.validate();
    return s;
}

Term parse_term(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) throw ConfigError("empty regressor term");
    auto wrapped = [&](const char* prefix, int& out_n, std::string& inner) {
        const std::size_t plen = std::strlen(prefix);
        if (s.size() > plen && s.compare(0, plen, prefix) == 0) {
            std::size_t i = plen;
            std::string digits;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) digits += s[i++];
            if (digits.empty() || i >= s.size() || s[i] != '(' || s.back() != ')') return false;
            out_n = std::stoi(digits);
            inner = s.substr(i + 1, s.size() - i - 2);
            return true;
        }
        return false;
    };
    int n = 0;
    std::string inner;
    if (wrapped("lag", n, inner)) {
        Term t = parse_term(inner);
        t.lag += n;
        return t;
    }
    if (wrapped("mean", n, inner)) {
        Term t = parse_term(inner);
        if (t.rolling != 1) throw ConfigError("nested rolling means in term " + text);
        t.rolling = n;
        return t;
    }
    static const std::unordered_map<std::string, Field> fields = {
        {"intercept", Field::Intercept}, {"const", Field::Intercept},
        {"rv", Field::RvSqrt},           {"iv", Field::IvSqrt},
        {"jv", Field::JvSqrt},           {"rs_minus", Field::RsMinusSqrt},
        {"rs_plus", Field::RsPlusSqrt},  {"impvol", Field::ImpliedVol},
        {"wednesday", Field::WednesdayDummy}};
    const auto it = fields.find(s);
    if (it == fields.end()) throw ConfigError("unknown regressor field '" + s + "'");
    return Term{it->second, 0, 1};
}

ModelSpec parse_model_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model spec file " + path);
    ModelSpec spec;
    std::string line;
    while (std::getline(in, line)) {
        const std::string l = trim(line);
        if (l.empty() || l[0] == '#') continue;
        const std::size_t eq = l.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value in " + path + ": " + l);
        const std::string key = trim(l.substr(0, eq));
        const std::string val = trim(l.substr(eq + 1));
        if (key == "name") {
            spec.name = val;
        } else if (key == "target") {
            if (val == "return") spec.target = Target::Return;
            else if (val == "rv_sqrt") spec.target = Target::RvSqrt;
            else throw ConfigError("unknown target '" + val + "'");
        } else if (key == "horizon") {
            spec.horizon = std::stoi(val);
        } else if (key == "regressors") {
            std::stringstream ss(val);
            std::string item;
            while (std::getline(ss, item, ',')) spec.regressors.push_back(parse_term(item));
        } else {
            throw ConfigError("unknown model spec key '" + key + "' in " + path);
        }
    }
    spec.validate();
    return spec;
}

std::vector<double> rolling_mean(const std::vector<double>& series, int k) {
    if (k < 1) throw ConfigError("rolling window must be >= 1");
    if (series.size() < static_cast<std::size_t>(k))
        throw SeriesTooShort("rolling_mean: series shorter than window");
    std::vector<double> out(series.size(), std::numeric_limits<double>::quiet_NaN());
    double acc = 0.0;
    for (std::size_t t = 0; t < series.size(); ++t) {
        acc += series[t];
        if (t >= static_cast<std::size_t>(k)) acc -= series[t - static_cast<std::size_t>(k)];
        if (t + 1 >= static_cast<std::size_t>(k)) out[t] = acc / static_cast<double>(k);
    }
    return out;
}

double direct_target(const std::vector<double>& series, std::size_t t, int h, Target kind) {
    if (h < 1) throw ConfigError("horizon must be >= 1");
    if (t + static_cast<std::size_t>(h) >= series.size())
        throw IndexOutOfRange("direct_target: t + h out of range");
    double acc = 0.0;
    for (int j = 1; j <= h; ++j) acc += series[t + static_cast<std::size_t>(j)];
    return kind == Target::Return ? acc : std::sqrt(acc);
}

namespace {

struct PanelSeries {
    std::vector<Date> dates;
    std::vector<double> rv_sqrt, iv_sqrt, jv_sqrt, rsm_sqrt, rsp_sqrt, impvol;
    std::vector<double> rv;  // variance units, for the RV target aggregate
    bool has_impvol = false;
};

PanelSeries extract_series(const rm::MeasurePanel& panel, AlignmentReport& report) {
    PanelSeries s;
    s.has_impvol = panel.implied_vol.has_value();
    for (std::size_t i = 0; i < panel.rows.size(); ++i) {
        const auto& d = panel.rows[i];
        if (!(d.rv > 0.0)) {
            ++report.degenerate_dropped;
            continue;
        }
        s.dates.push_back(d.day);
        s.rv.push_back(d.rv);
        s.rv_sqrt.push_back(std::sqrt(d.rv));
        s.iv_sqrt.push_back(std::sqrt(std::max(0.0, d.iv)));
        s.jv_sqrt.push_back(std::sqrt(std::max(0.0, d.jv)));
        s.rsm_sqrt.push_back(std::sqrt(std::max(0.0, d.rs_minus)));
        s.rsp_sqrt.push_back(std::sqrt(std::max(0.0, d.rs_plus)));
        if (s.has_impvol) s.impvol.push_back((*panel.implied_vol)[i]);
    }
    return s;
}

const std::vector<double>* field_series(const PanelSeries& s, Field f) {
    switch (f) {
        case Field::RvSqrt: return &s.rv_sqrt;
        case Field::IvSqrt: return &s.iv_sqrt;
        case Field::JvSqrt: return &s.jv_sqrt;
        case Field::RsMinusSqrt: return &s.rsm_sqrt;
        case Field::RsPlusSqrt: return &s.rsp_sqrt;
        case Field::ImpliedVol: return &s.impvol;
        default: return nullptr;
    }
}

BuiltDataset assemble(const PanelSeries& series, const std::vector<double>& target_series,
                      const ModelSpec& spec, AlignmentReport report) {
    spec.validate();
    const std::size_t n = series.dates.size();
    const int h = spec.horizon;

    int max_lookback = 0;
    for (const auto& term : spec.regressors) max_lookback = std::max(max_lookback, term.lookback());
    if (n < static_cast<std::size_t>(max_lookback + h + 1))
        throw InsufficientHistory("need at least " + std::to_string(max_lookback + h + 1) +
                                  " days for model " + spec.name);

    // regressor columns evaluated on the full day axis
    std::vector<std::vector<double>> cols(spec.regressors.size());
    for (std::size_t j = 0; j < spec.regressors.size(); ++j) {
        const Term& term = spec.regressors[j];
        if (term.field == Field::Intercept) {
            cols[j].assign(n, 1.0);
            continue;
        }
        if (term.field == Field::WednesdayDummy) continue;  // computed from target date
        const std::vector<double>* base = field_series(series, term.field);
        if (term.field == Field::ImpliedVol && !series.has_impvol)
            throw MissingImpliedVol("model " + spec.name + " needs an implied-vol series");
        std::vector<double> v = *base;
        if (term.rolling > 1) v = rolling_mean(v, term.rolling);
        if (term.lag > 0) {
            std::vector<double> shifted(n, std::numeric_limits<double>::quiet_NaN());
            for (std::size_t t = static_cast<std::size_t>(term.lag); t < n; ++t)
                shifted[t] = v[t - static_cast<std::size_t>(term.lag)];
            v = std::move(shifted);
        }
        cols[j] = std::move(v);
    }

    const std::size_t t0 = static_cast<std::size_t>(max_lookback);
    const std::size_t t1 = n - static_cast<std::size_t>(h);  // exclusive
    const std::size_t rows = t1 - t0;
    report.rows_total = n;
    report.rows_used = rows;
    report.warmup_dropped = n - rows;

    BuiltDataset out;
    out.spec = spec;
    out.data.y.resize(static_cast<Eigen::Index>(rows));
    out.data.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(spec.regressors.size()));
    for (const auto& term : spec.regressors) out.data.labels.push_back(term.label());
    out.data.dates.reserve(rows);
    out.target_dates.reserve(rows);

    for (std::size_t t = t0; t < t1; ++t) {
        const std::size_t r = t - t0;
        out.data.y[static_cast<Eigen::Index>(r)] = direct_target(target_series, t, h, spec.target);
        const Date target_day = series.dates[t + 1];
        for (std::size_t j = 0; j < spec.regressors.size(); ++j) {
            double v;
            if (spec.regressors[j].field == Field::WednesdayDummy)
                v = weekday(target_day) == 3 ? 1.0 : 0.0;
            else
                v = cols[j][t];
            out.data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
        }
        out.data.dates.push_back(series.dates[t]);
        out.target_dates.push_back(target_day);
    }
    report.first_date = out.data.dates.front();
    report.last_date = out.data.dates.back();
    for (std::size_t j = 1; j < spec.regressors.size(); ++j) {
        if (out.data.x.col(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff() == 0.0)
            report.warnings.push_back("regressor " + spec.regressors[j].label() +
                                      " is identically zero over the aligned sample");
    }
    out.report = report;

    // no-look-ahead audit: the latest information date must precede the
    // earliest target date on every row
    for (std::size_t r = 0; r < rows; ++r) {
        if (!(out.data.dates[r] < out.target_dates[r]))
            throw DataError("look-ahead audit failed at row " + std::to_string(r));
    }
    out.data.validate();
    return out;
}

}  // namespace

BuiltDataset build_return_dataset(const rm::MeasurePanel& panel,
                                  const std::vector<std::pair<Date, double>>& returns,
                                  const ModelSpec& spec) {
    if (spec.target != Target::Return)
        throw ConfigError("build_return_dataset called with a non-return spec");
    AlignmentReport report;
    PanelSeries series = extract_series(panel, report);

    // align returns to the panel's day axis
    std::unordered_map<Date, double> by_date;
    for (const auto& [d, r] : returns) by_date.emplace(d, r);
    std::vector<double> target(series.dates.size());
    for (std::size_t i = 0; i < series.dates.size(); ++i) {
        const auto it = by_date.find(series.dates[i]);
        if (it == by_date.end())
            throw DataError("return series missing panel date " + format_date(series.dates[i]));
        target[i] = it->second;
    }
    return assemble(series, target, spec, report);
}

BuiltDataset build_rv_dataset(const rm::MeasurePanel& panel, const ModelSpec& spec) {
    if (spec.target != Target::RvSqrt)
        throw ConfigError("build_rv_dataset called with a non-RV spec");
    AlignmentReport report;
    PanelSeries series = extract_series(panel, report);
    return assemble(series, series.rv, spec, report);
}

std::vector<double> term_series(const rm::MeasurePanel& panel, const Term& term) {
    if (term.field == Field::Intercept)
        return std::vector<double>(panel.rows.size(), 1.0);
    AlignmentReport report;
    const PanelSeries series = extract_series(panel, report);
    if (report.degenerate_dropped > 0)
        throw DataError("term_series: panel contains zero-RV days; filter them first");
    if (term.field == Field::WednesdayDummy) {
        std::vector<double> v(series.dates.size());
        for (std::size_t t = 0; t < v.size(); ++t) v[t] = weekday(series.dates[t]) == 3 ? 1.0 : 0.0;
        return v;
    }
    if (term.field == Field::ImpliedVol && !series.has_impvol)
        throw MissingImpliedVol("term_series: panel has no implied-vol series");
    std::vector<double> v = *field_series(series, term.field);
    if (term.rolling > 1) v = rolling_mean(v, term.rolling);
    if (term.lag > 0) {
        std::vector<double> shifted(v.size(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t t = static_cast<std::size_t>(term.lag); t < v.size(); ++t)
            shifted[t] = v[t - static_cast<std::size_t>(term.lag)];
        v = std::move(shifted);
    }
    return v;
}

void write_dataset_csv(const std::string& path, const BuiltDataset& built) {
    std::vector<std::string> header = {"date", "target_date", "y"};
    for (const auto& l : built.data.labels) header.push_back(l);
    csv::Writer w(header);
    for (std::size_t r = 0; r < built.data.n(); ++r) {
        std::vector<std::string> row = {format_date(built.data.dates[r]),
                                        format_date(built.target_dates[r]),
                                        csv::format_double(built.data.y[static_cast<Eigen::Index>(r)])};
        for (std::size_t j = 0; j < built.data.p(); ++j)
            row.push_back(csv::format_double(
                built.data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j))));
        w.add_row(row);
    }
    w.write(path);
}

}  // namespace qrv::models
