#include "qrv/realized.hpp"

#include <algorithm>
#include <cmath>

#include "qrv/csv.hpp"
#include "qrv/errors.hpp"
#include "qrv/kernels.hpp"
#include "qrv/stats.hpp"

namespace qrv::rm {

namespace {
// MedRV scale: pi / (6 - 4*sqrt(3) + pi)
const double kMedRvScale = M_PI / (6.0 - 4.0 * std::sqrt(3.0) + M_PI);
// MedRQ scale: 3*pi / (9*pi + 72 - 52*sqrt(3)); the estimator carries an
// extra factor M relative to MedRV (fourth powers).
const double kMedRqScale = 3.0 * M_PI / (9.0 * M_PI + 72.0 - 52.0 * std::sqrt(3.0));
}  // namespace

double realized_variance(std::span<const double> returns) {
    if (returns.empty()) throw EmptyDay("realized_variance on empty day");
    return kernels::sum_sq(returns);
}

std::pair<double, double> realized_semivariances(std::span<const double> returns) {
    if (returns.empty()) throw EmptyDay("realized_semivariances on empty day");
    double neg = 0.0, pos = 0.0;
    kernels::sum_sq_signed(returns, neg, pos);
    return {neg, pos};
}

double med_rv(std::span<const double> returns) {
    const std::size_t m = returns.size();
    if (m < 3) throw TooFewObservations("med_rv needs at least 3 intraday returns");
    double s2 = 0.0, s4 = 0.0;
    kernels::med3_pow_sums(returns, s2, s4);
    const double md = static_cast<double>(m);
    return kMedRvScale * (md / (md - 2.0)) * s2;
}

double med_rq(std::span<const double> returns) {
    const std::size_t m = returns.size();
    if (m < 3) throw TooFewObservations("med_rq needs at least 3 intraday returns");
    double s2 = 0.0, s4 = 0.0;
    kernels::med3_pow_sums(returns, s2, s4);
    const double md = static_cast<double>(m);
    return kMedRqScale * md * (md / (md - 2.0)) * s4;
}

double jump_test_z(double rv, double medrv, double medrq, int m, double theta) {
    if (!(rv > 0.0)) throw DegenerateDay("jump_test_z: rv must be positive");
    if (!(medrv > 0.0)) throw DegenerateDay("jump_test_z: medrv must be positive");
    const double ratio_gap = (rv - medrv) / rv;
    const double quart = std::max(1.0, medrq / (medrv * medrv));
    return ratio_gap / std::sqrt((theta / static_cast<double>(m)) * quart);
}

Decomposition decompose_iv_jv(const DailyMeasures& m, double significance) {
    if (!(significance > 0.0 && significance < 1.0))
        throw ConfigError("jump significance level must lie in (0,1)");
    const double crit = stats::norm_quantile(1.0 - significance);
    Decomposition d;
    d.jump_flag = m.z_jump > crit;
    if (d.jump_flag) {
        if (m.medrv > m.rv) {
            d.iv = m.rv;
            d.jv = 0.0;
            d.clamped = true;
        } else {
            d.iv = m.medrv;
            d.jv = m.rv - m.medrv;
        }
    } else {
        d.iv = m.rv;
        d.jv = 0.0;
    }
    return d;
}

MeasurePanel compute_panel(const std::vector<ingest::IntradayGrid>& grids, double significance,
                           std::vector<std::string>* warnings) {
    MeasurePanel panel;
    panel.rows.reserve(grids.size());
    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };
    for (const auto& g : grids) {
        const std::span<const double> r(g.log_returns);
        DailyMeasures d;
        d.day = g.day;
        d.m = static_cast<int>(r.size());
        d.rv = realized_variance(r);
        if (d.rv == 0.0) {
            warn(format_date(g.day) + ": zero realized variance, day excluded");
            continue;
        }
        std::tie(d.rs_minus, d.rs_plus) = realized_semivariances(r);
        d.medrv = med_rv(r);
        d.medrq = med_rq(r);
        if (d.medrv > 0.0) {
            d.z_jump = jump_test_z(d.rv, d.medrv, d.medrq, d.m);
        } else {
            // all-median-zero day (sparse trading): cannot test, treat as no-jump
            d.z_jump = 0.0;
            warn(format_date(g.day) + ": zero MedRV, jump test skipped");
        }
        const Decomposition dec = decompose_iv_jv(d, significance);
        d.iv = dec.iv;
        d.jv = dec.jv;
        d.jump_flag = dec.jump_flag;
        if (dec.clamped)
            warn(format_date(g.day) + ": MedRV exceeds RV on flagged day, JV clamped to 0");
        panel.rows.push_back(d);
    }
    if (panel.rows.empty()) throw NoValidDays("no non-degenerate days in panel");
    return panel;
}

void MeasurePanel::attach_implied_vol(const std::vector<std::pair<Date, double>>& series) {
    std::vector<double> aligned(rows.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Date d = rows[i].day;
        const auto it = std::lower_bound(series.begin(), series.end(), d,
                                         [](const auto& p, Date day) { return p.first < day; });
        if (it == series.end() || it->first != d)
            throw DataError("implied vol series missing date " + format_date(d));
        aligned[i] = it->second;
        ++hits;
    }
    (void)hits;
    implied_vol = std::move(aligned);
}

void write_panel_csv(const std::string& path, const MeasurePanel& panel) {
    csv::Writer w({"date", "rv", "medrv", "rs_minus", "rs_plus", "iv", "jv", "z_jump", "jump_flag"});
    for (const auto& d : panel.rows) {
        w.add_row({format_date(d.day), csv::format_double(d.rv), csv::format_double(d.medrv),
                   csv::format_double(d.rs_minus), csv::format_double(d.rs_plus),
                   csv::format_double(d.iv), csv::format_double(d.jv),
                   csv::format_double(d.z_jump), d.jump_flag ? "1" : "0"});
    }
    w.write(path);
}

MeasurePanel read_panel_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    auto col = [&](const char* name) { return t.require_column(name, path); };
    const std::size_t cd = col("date"), crv = col("rv"), cmed = col("medrv"),
                      crm = col("rs_minus"), crp = col("rs_plus"), civ = col("iv"),
                      cjv = col("jv"), cz = col("z_jump"), cf = col("jump_flag");
    MeasurePanel p;
    for (const auto& row : t.rows) {
        DailyMeasures d;
        const auto day = parse_date(row[cd]);
        if (!day) throw DataError("bad date '" + row[cd] + "' in " + path);
        d.day = *day;
        d.rv = std::stod(row[crv]);
        d.medrv = std::stod(row[cmed]);
        d.rs_minus = std::stod(row[crm]);
        d.rs_plus = std::stod(row[crp]);
        d.iv = std::stod(row[civ]);
        d.jv = std::stod(row[cjv]);
        d.z_jump = std::stod(row[cz]);
        d.jump_flag = row[cf] == "1" || row[cf] == "true";
        if (!p.rows.empty() && d.day <= p.rows.back().day)
            throw DataError("panel dates not strictly increasing in " + path);
        p.rows.push_back(d);
    }
    if (p.rows.empty()) throw EmptyFile("no panel rows in " + path);
    return p;
}

}  // namespace qrv::rm
