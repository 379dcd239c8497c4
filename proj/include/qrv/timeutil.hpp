#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace qrv {

// Calendar date as days since 1970-01-01 (proleptic Gregorian). Timestamps
// are epoch milliseconds taken as exchange-local wall time; no time-zone
// conversion is performed anywhere.
using Date = std::int32_t;
using TimestampMs = std::int64_t;

constexpr std::int64_t kMsPerDay = 86400000LL;

Date days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(Date z, int& y, unsigned& m, unsigned& d);

inline Date date_of(TimestampMs ts) {
    std::int64_t d = ts / kMsPerDay;
    if (ts < 0 && ts % kMsPerDay != 0) --d;
    return static_cast<Date>(d);
}

inline std::int32_t ms_of_day(TimestampMs ts) {
    return static_cast<std::int32_t>(ts - static_cast<std::int64_t>(date_of(ts)) * kMsPerDay);
}

// 0 = Sunday ... 3 = Wednesday ... 6 = Saturday
inline int weekday(Date d) {
    const int w = static_cast<int>((d % 7 + 7) % 7);
    return (w + 4) % 7;  // 1970-01-01 was a Thursday
}

std::string format_date(Date d);                 // YYYY-MM-DD
std::string format_timestamp(TimestampMs ts);    // YYYY-MM-DD HH:MM:SS(.mmm)

// "YYYY-MM-DD" only.
std::optional<Date> parse_date(const std::string& s);

// ISO-8601 ("YYYY-MM-DD[ T]HH:MM[:SS[.fff]]", optional trailing Z) or plain
// epoch-milliseconds integer.
std::optional<TimestampMs> parse_timestamp(const std::string& s);

// "HH:MM" or "HH:MM:SS" -> milliseconds since midnight.
std::optional<std::int32_t> parse_time_of_day(const std::string& s);

}  // namespace qrv
