#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "qrv/timeutil.hpp"

namespace qrv::ingest {

struct TickRecord {
    TimestampMs timestamp = 0;
    double price = 0.0;  // > 0
};

struct TickSchema {
    std::string timestamp_column = "timestamp";
    std::string price_column = "price";
    char delimiter = ',';
    // strict: any malformed row raises UnparseableRow; otherwise malformed
    // rows are skipped, counted and reported in LoadReport.
    bool strict = true;
};

struct LoadReport {
    std::size_t total_rows = 0;
    std::size_t malformed_rows = 0;
    std::vector<std::string> warnings;  // first few malformed rows, with reasons
};

struct SessionSpec {
    std::int32_t open_ms = 9 * 3600000 + 30 * 60000;   // 09:30
    std::int32_t close_ms = 16 * 3600000;               // 16:00
    std::int32_t bar_ms = 5 * 60000;                    // 5-minute bars
    std::set<Date> excluded_dates;
    std::size_t min_ticks_per_day = 50;

    std::size_t bars_per_day() const;  // M; throws ConfigError if invalid
};

// One session day on the regular grid. log_prices are 100*ln(price) so that
// log_returns are in percent and the telescoping identity holds exactly.
struct IntradayGrid {
    Date day = 0;
    std::vector<double> log_prices;   // M+1 values
    std::vector<double> log_returns;  // M values, diffs of log_prices
};

struct TickLoadResult {
    std::vector<TickRecord> ticks;  // sorted by timestamp (stable)
    LoadReport report;
};

TickLoadResult load_ticks(const std::string& path, const TickSchema& schema = {});

struct SampleReport {
    std::vector<std::string> dropped_days;  // "date: reason"
};

// Last-tick sampling onto the session grid. Grid points before the first
// tick of a day are filled with that day's first observed price. Days in
// excluded_dates or with fewer than min_ticks_per_day ticks are dropped.
std::vector<IntradayGrid> sample_last_tick(const std::vector<TickRecord>& ticks,
                                           const SessionSpec& spec,
                                           SampleReport* report = nullptr);

// Open-to-close daily log-returns (percent), one entry per grid day.
std::vector<std::pair<Date, double>> daily_returns(const std::vector<IntradayGrid>& grids);

// CSV emission per the external interface: daily returns (date,return) and
// intraday bars (date,bar,log_return).
void write_daily_returns_csv(const std::string& path,
                             const std::vector<std::pair<Date, double>>& returns);
void write_intraday_csv(const std::string& path, const std::vector<IntradayGrid>& grids);

std::vector<std::pair<Date, double>> read_daily_returns_csv(const std::string& path);

}  // namespace qrv::ingest
