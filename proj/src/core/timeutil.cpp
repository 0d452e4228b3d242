#include "core/timeutil.hpp"

#include "core/errors.hpp"

#include <cstdio>

namespace tvsched {

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = doy - (153 * mp + 2) / 5 + 1;
    month = mp + (mp < 10 ? 3 : -9);
    year = static_cast<int>(y + (month <= 2));
}

HourStamp parse_hour_stamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    char tail = '\0';
    int n = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d%c", &y, &mo, &d, &h, &mi, &tail);
    if (n != 5)
        fail(ErrorCode::parse, "bad timestamp '" + text + "' (expected YYYY-MM-DDTHH:MM)");
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi != 0)
        fail(ErrorCode::parse, "bad timestamp '" + text + "' (hour resolution, minutes must be 00)");
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 24 + h;
}

std::string format_hour_stamp(HourStamp hour) {
    std::int64_t days = hour >= 0 ? hour / 24 : (hour - 23) / 24;
    int h = static_cast<int>(hour - days * 24);
    int y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:00", y, mo, d, h);
    return buf;
}

int day_of_week(HourStamp hour) {
    std::int64_t days = hour >= 0 ? hour / 24 : (hour - 23) / 24;
    // epoch day 0 (1970-01-01) was a Thursday; 0 = Monday here
    int dow = static_cast<int>((days + 3) % 7);
    return dow < 0 ? dow + 7 : dow;
}

int hour_of_day(HourStamp hour) {
    int h = static_cast<int>(hour % 24);
    return h < 0 ? h + 24 : h;
}

} // namespace tvsched
