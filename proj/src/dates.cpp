#include "abd/dates.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace abd {

int weekday_index(Date d)
{
    // iso_encoding: Mon = 1 .. Sun = 7.
    return static_cast<int>(std::chrono::weekday{d}.iso_encoding()) - 1;
}

bool is_weekend(Date d)
{
    int w = weekday_index(d);
    return w == 5 || w == 6;
}

const char* weekday_name(int index)
{
    static constexpr std::array<const char*, 7> names = {"Mon", "Tue", "Wed", "Thu",
                                                         "Fri", "Sat", "Sun"};
    return names.at(static_cast<std::size_t>(index));
}

namespace {

bool all_digits(std::string_view s)
{
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

int to_int(std::string_view s)
{
    int value = 0;
    std::from_chars(s.data(), s.data() + s.size(), value);
    return value;
}

} // namespace

std::optional<Date> parse_date(std::string_view text)
{
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    std::string_view y = text.substr(0, 4);
    std::string_view m = text.substr(5, 2);
    std::string_view d = text.substr(8, 2);
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) {
        return std::nullopt;
    }
    std::chrono::year_month_day ymd{std::chrono::year{to_int(y)},
                                    std::chrono::month{static_cast<unsigned>(to_int(m))},
                                    std::chrono::day{static_cast<unsigned>(to_int(d))}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return Date{ymd};
}

std::string format_date(Date d)
{
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

} // namespace abd
