#include "qrv/data_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qrv/csv.hpp"
#include "qrv/errors.hpp"

namespace qrv::ingest {

std::size_t SessionSpec::bars_per_day() const {
    if (open_ms >= close_ms) throw ConfigError("session open must precede close");
    if (bar_ms <= 0) throw ConfigError("bar interval must be positive");
    const std::int64_t len = close_ms - open_ms;
    if (len % bar_ms != 0)
        throw ConfigError("bar interval does not divide the session length evenly");
    return static_cast<std::size_t>(len / bar_ms);
}

TickLoadResult load_ticks(const std::string& path, const TickSchema& schema) {
    const csv::Table table = csv::read_file(path, schema.delimiter);
    const std::size_t ts_col = table.require_column(schema.timestamp_column, path);
    const std::size_t px_col = table.require_column(schema.price_column, path);

    TickLoadResult out;
    out.report.total_rows = table.rows.size();
    if (table.rows.empty()) throw EmptyFile("no data rows in " + path);

    auto bad_row = [&](std::size_t idx, const std::string& reason) {
        if (schema.strict)
            throw UnparseableRow("row " + std::to_string(idx + 1) + " of " + path + ": " + reason);
        ++out.report.malformed_rows;
        if (out.report.warnings.size() < 20)
            out.report.warnings.push_back("row " + std::to_string(idx + 1) + ": " + reason);
    };

    out.ticks.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() <= std::max(ts_col, px_col)) {
            bad_row(i, "too few columns");
            continue;
        }
        const auto ts = parse_timestamp(row[ts_col]);
        if (!ts) {
            bad_row(i, "unparseable timestamp '" + row[ts_col] + "'");
            continue;
        }
        double price = 0.0;
        try {
            std::size_t pos = 0;
            price = std::stod(row[px_col], &pos);
            if (pos != row[px_col].size()) throw std::invalid_argument(row[px_col]);
        } catch (const std::exception&) {
            bad_row(i, "unparseable price '" + row[px_col] + "'");
            continue;
        }
        if (!(price > 0.0) || !std::isfinite(price)) {
            bad_row(i, "non-positive price " + row[px_col]);
            continue;
        }
        out.ticks.push_back({*ts, price});
    }
    if (out.ticks.empty()) throw EmptyFile("no valid ticks in " + path);

    std::stable_sort(out.ticks.begin(), out.ticks.end(),
                     [](const TickRecord& a, const TickRecord& b) { return a.timestamp < b.timestamp; });
    return out;
}

std::vector<IntradayGrid> sample_last_tick(const std::vector<TickRecord>& ticks,
                                           const SessionSpec& spec, SampleReport* report) {
    const std::size_t bars = spec.bars_per_day();
    if (bars < 3) throw ConfigError("session/bar configuration yields fewer than 3 bars per day");
    if (ticks.empty()) throw NoValidDays("no ticks supplied");

    std::map<Date, std::vector<const TickRecord*>> by_day;
    for (const auto& t : ticks) by_day[date_of(t.timestamp)].push_back(&t);

    auto drop = [&](Date day, const std::string& reason) {
        if (report) report->dropped_days.push_back(format_date(day) + ": " + reason);
    };

    std::vector<IntradayGrid> grids;
    for (const auto& [day, day_ticks] : by_day) {
        if (spec.excluded_dates.count(day)) {
            drop(day, "excluded date");
            continue;
        }
        // session-filtered ticks only
        std::vector<const TickRecord*> in_session;
        in_session.reserve(day_ticks.size());
        const std::int64_t day_ms = static_cast<std::int64_t>(day) * kMsPerDay;
        for (const TickRecord* t : day_ticks) {
            const std::int64_t tod = t->timestamp - day_ms;
            if (tod >= spec.open_ms && tod <= spec.close_ms) in_session.push_back(t);
        }
        if (in_session.size() < spec.min_ticks_per_day) {
            drop(day, "only " + std::to_string(in_session.size()) + " in-session ticks");
            continue;
        }

        IntradayGrid g;
        g.day = day;
        g.log_prices.resize(bars + 1);
        double last_price = in_session.front()->price;  // pre-open fill seed
        std::size_t k = 0;
        for (std::size_t i = 0; i <= bars; ++i) {
            const std::int64_t grid_ms = day_ms + spec.open_ms + static_cast<std::int64_t>(i) * spec.bar_ms;
            while (k < in_session.size() && in_session[k]->timestamp <= grid_ms) {
                last_price = in_session[k]->price;
                ++k;
            }
            g.log_prices[i] = 100.0 * std::log(last_price);
        }
        g.log_returns.resize(bars);
        for (std::size_t i = 0; i < bars; ++i)
            g.log_returns[i] = g.log_prices[i + 1] - g.log_prices[i];
        grids.push_back(std::move(g));
    }
    if (grids.empty()) throw NoValidDays("no usable session days after filtering");
    return grids;
}

std::vector<std::pair<Date, double>> daily_returns(const std::vector<IntradayGrid>& grids) {
    if (grids.empty()) throw NoValidDays("no grids supplied");
    std::vector<std::pair<Date, double>> out;
    out.reserve(grids.size());
    for (const auto& g : grids)
        out.emplace_back(g.day, g.log_prices.back() - g.log_prices.front());
    return out;
}

void write_daily_returns_csv(const std::string& path,
                             const std::vector<std::pair<Date, double>>& returns) {
    csv::Writer w({"date", "return"});
    for (const auto& [d, r] : returns) w.add_row({format_date(d), csv::format_double(r)});
    w.write(path);
}

void write_intraday_csv(const std::string& path, const std::vector<IntradayGrid>& grids) {
    csv::Writer w({"date", "bar", "log_return"});
    for (const auto& g : grids)
        for (std::size_t i = 0; i < g.log_returns.size(); ++i)
            w.add_row({format_date(g.day), std::to_string(i), csv::format_double(g.log_returns[i])});
    w.write(path);
}

std::vector<std::pair<Date, double>> read_daily_returns_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    const std::size_t dc = t.require_column("date", path);
    const std::size_t rc = t.require_column("return", path);
    std::vector<std::pair<Date, double>> out;
    for (const auto& row : t.rows) {
        const auto d = parse_date(row[dc]);
        if (!d) throw DataError("bad date '" + row[dc] + "' in " + path);
        out.emplace_back(*d, std::stod(row[rc]));
    }
    return out;
}

}  // namespace qrv::ingest
