#include "qrv/timeutil.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace qrv {

// Howard Hinnant's civil-days algorithms.
Date days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<Date>(era * 146097 + static_cast<int>(doe) - 719468);
}

void civil_from_days(Date z, int& y, unsigned& m, unsigned& d) {
    std::int64_t zz = static_cast<std::int64_t>(z) + 719468;
    const std::int64_t era = (zz >= 0 ? zz : zz - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(zz - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

std::string format_date(Date z) {
    int y;
    unsigned m, d;
    civil_from_days(z, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
    return buf;
}

std::string format_timestamp(TimestampMs ts) {
    const Date day = date_of(ts);
    const std::int32_t ms = ms_of_day(ts);
    const int h = ms / 3600000;
    const int mi = (ms / 60000) % 60;
    const int s = (ms / 1000) % 60;
    const int frac = ms % 1000;
    char buf[32];
    if (frac != 0)
        std::snprintf(buf, sizeof(buf), "%s %02d:%02d:%02d.%03d", format_date(day).c_str(), h, mi, s, frac);
    else
        std::snprintf(buf, sizeof(buf), "%s %02d:%02d:%02d", format_date(day).c_str(), h, mi, s);
    return buf;
}

std::optional<Date> parse_date(const std::string& s) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (std::sscanf(s.c_str(), "%d-%u-%u", &y, &m, &d) != 3) return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    return days_from_civil(y, m, d);
}

std::optional<std::int32_t> parse_time_of_day(const std::string& s) {
    int h = 0, m = 0, sec = 0;
    const int k = std::sscanf(s.c_str(), "%d:%d:%d", &h, &m, &sec);
    if (k < 2) return std::nullopt;
    if (h < 0 || h > 23 || m < 0 || m > 59 || sec < 0 || sec > 59) return std::nullopt;
    return (h * 3600 + m * 60 + sec) * 1000;
}

std::optional<TimestampMs> parse_timestamp(const std::string& raw) {
    std::string s = raw;
    // trim
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty()) return std::nullopt;
    if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();

    // plain integer => epoch milliseconds
    bool all_digits = true;
    for (std::size_t i = (s[0] == '-' ? 1u : 0u); i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) { all_digits = false; break; }
    if (all_digits && !s.empty()) {
        char* end = nullptr;
        const long long v = std::strtoll(s.c_str(), &end, 10);
        if (end && *end == '\0') return static_cast<TimestampMs>(v);
        return std::nullopt;
    }

    int y = 0, h = 0, mi = 0;
    unsigned mo = 0, d = 0;
    double sec = 0.0;
    int n = std::sscanf(s.c_str(), "%d-%u-%u%*1[ T]%d:%d:%lf", &y, &mo, &d, &h, &mi, &sec);
    if (n < 5) {
        // date-only
        n = std::sscanf(s.c_str(), "%d-%u-%u", &y, &mo, &d);
        if (n != 3) return std::nullopt;
        h = mi = 0;
        sec = 0.0;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0.0 || sec >= 61.0) return std::nullopt;
    const Date day = days_from_civil(y, mo, d);
    const std::int64_t ms =
        static_cast<std::int64_t>(day) * kMsPerDay +
        static_cast<std::int64_t>(h) * 3600000LL + static_cast<std::int64_t>(mi) * 60000LL +
        static_cast<std::int64_t>(sec * 1000.0 + 0.5);
    return ms;
}

}  // namespace qrv
