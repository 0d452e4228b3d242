#pragma once

#include <cstdint>
#include <string>

namespace tvsched {

// Calendar instants are hours since the Unix epoch. All viewership data is
// hour-resolution, so this is the only clock the library needs.
using HourStamp = std::int64_t;

std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day);

// Parses "YYYY-MM-DDTHH:MM" (minutes must be 00) into epoch hours.
HourStamp parse_hour_stamp(const std::string& text);
std::string format_hour_stamp(HourStamp hour);

// 0 = Monday .. 6 = Sunday
int day_of_week(HourStamp hour);
int hour_of_day(HourStamp hour);

} // namespace tvsched
