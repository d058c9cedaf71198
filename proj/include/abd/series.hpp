#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "abd/dates.hpp"

namespace abd {

// One disease-country pair. Both fields are stored trimmed; comparison is
// case-insensitive, so ("Dengue", "BRAZIL") names the same series as
// ("dengue", "brazil").
struct Topic {
    std::string disease;
    std::string country;

    Topic(std::string disease_in, std::string country_in);

    // Lowercase "disease|country", usable as a map key.
    std::string key() const;
};

bool operator==(const Topic& a, const Topic& b);
bool operator!=(const Topic& a, const Topic& b);
bool operator<(const Topic& a, const Topic& b);

// Daily document counts for one topic over consecutive calendar days.
// counts[i] belongs to start_date + i days; no gaps, length >= 1.
struct CountSeries {
    Topic topic;
    Date start_date;
    std::vector<std::int64_t> counts;

    CountSeries(Topic topic_in, Date start, std::vector<std::int64_t> counts_in);

    std::size_t size() const { return counts.size(); }
    Date date(std::size_t i) const { return start_date + std::chrono::days(static_cast<long>(i)); }
    Date end_date() const { return date(counts.size() - 1); }
    int weekday(std::size_t i) const { return weekday_index(date(i)); }
    bool contains(Date d) const { return d >= start_date && d <= end_date(); }
    std::size_t index_of(Date d) const;
};

bool operator==(const CountSeries& a, const CountSeries& b);

// Gold-standard posting dates for one topic, sorted ascending with
// same-date duplicates collapsed.
struct GoldStandard {
    Topic topic;
    std::vector<Date> posting_dates;

    GoldStandard(Topic topic_in, std::vector<Date> dates);
};

bool operator==(const GoldStandard& a, const GoldStandard& b);

// Replace every count c with 0 < c <= cutoff by 0; larger counts pass
// through untouched. The calendar stays gapless. cutoff must be >= 0.
CountSeries purge(const CountSeries& series, std::int64_t cutoff);

// Counts CSV: header `disease,country,date,count`, date YYYY-MM-DD, count a
// base-10 non-negative integer. Extra header columns are permitted and
// ignored (so detector output can be re-read); every data row must have as
// many fields as the header. Rows for the same topic+date are summed;
// missing dates inside a topic's observed range are filled with 0.
// Returns one series per topic, sorted by topic.
std::vector<CountSeries> parse_counts(std::istream& in);

// Gold CSV: header `disease,country,date`.
std::vector<GoldStandard> parse_gold(std::istream& in);

void write_counts_csv(std::ostream& out, std::span<const CountSeries> series);
void write_gold_csv(std::ostream& out, std::span<const GoldStandard> gold);

} // namespace abd
