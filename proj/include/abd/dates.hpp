#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace abd {

// Calendar dates are day counts since the Unix epoch; arithmetic and
// weekday math go through std::chrono.
using Date = std::chrono::sys_days;

constexpr Date make_date(int year, unsigned month, unsigned day)
{
    return Date{std::chrono::year{year} / static_cast<int>(month) / static_cast<int>(day)};
}

// Day of week, Monday = 0 .. Sunday = 6.
int weekday_index(Date d);

// Saturday or Sunday.
bool is_weekend(Date d);

// Three-letter English name for a Monday-based weekday index.
const char* weekday_name(int index);

// Strict ISO 8601 calendar date, YYYY-MM-DD only. Rejects impossible
// components such as 2008-13-40 or 2009-02-29.
std::optional<Date> parse_date(std::string_view text);

std::string format_date(Date d);

} // namespace abd
