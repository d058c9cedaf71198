#include "abd/series.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <utility>

#include "abd/errors.hpp"

namespace abd {

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::int64_t parse_count_field(const std::string& raw, std::size_t line_no)
{
    std::string s = trim(raw);
    if (s.empty()) {
        throw ParseError(line_no, "empty count");
    }
    if (s[0] == '-') {
        throw ParseError(line_no, "negative count '" + s + "'");
    }
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc::result_out_of_range) {
        throw ParseError(line_no, "count out of range '" + s + "'");
    }
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(line_no, "count is not a base-10 integer '" + s + "'");
    }
    return value;
}

Date parse_date_field(const std::string& raw, std::size_t line_no)
{
    std::string s = trim(raw);
    auto d = parse_date(s);
    if (!d) {
        throw ParseError(line_no, "unparseable date '" + s + "' (expected YYYY-MM-DD)");
    }
    return *d;
}

// Reads the header line, checks the expected column-name prefix (extra
// columns are allowed) and returns the total column count.
std::size_t read_header(std::istream& in, std::span<const char* const> expected,
                        std::size_t& line_no)
{
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_fields(line);
        if (fields.size() < expected.size()) {
            throw ParseError(line_no, "header has " + std::to_string(fields.size()) +
                                          " columns, expected at least " +
                                          std::to_string(expected.size()));
        }
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (lower(trim(fields[i])) != expected[i]) {
                throw ParseError(line_no, "header column " + std::to_string(i + 1) +
                                              " is '" + trim(fields[i]) + "', expected '" +
                                              expected[i] + "'");
            }
        }
        return fields.size();
    }
    throw ParseError(line_no + 1, "missing header");
}

struct RawRow {
    Topic topic;
    Date date;
    std::int64_t count;
};

// Common row loop: header + per-row field split, shared by both parsers.
template <typename RowFn>
void for_each_row(std::istream& in, std::span<const char* const> expected_header, RowFn fn)
{
    std::size_t line_no = 0;
    std::size_t width = read_header(in, expected_header, line_no);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_fields(line);
        if (fields.size() != width) {
            throw ParseError(line_no, "row has " + std::to_string(fields.size()) +
                                          " columns, expected " + std::to_string(width));
        }
        std::string disease = trim(fields[0]);
        std::string country = trim(fields[1]);
        if (disease.empty() || country.empty()) {
            throw ParseError(line_no, "empty disease or country field");
        }
        fn(Topic(std::move(disease), std::move(country)), fields, line_no);
    }
}

} // namespace

Topic::Topic(std::string disease_in, std::string country_in)
    : disease(trim(disease_in)), country(trim(country_in))
{
    if (disease.empty() || country.empty()) {
        throw DataError("topic fields must be non-empty after trimming");
    }
}

std::string Topic::key() const
{
    return lower(disease) + "|" + lower(country);
}

bool operator==(const Topic& a, const Topic& b)
{
    return a.key() == b.key();
}

bool operator!=(const Topic& a, const Topic& b)
{
    return !(a == b);
}

bool operator<(const Topic& a, const Topic& b)
{
    return a.key() < b.key();
}

CountSeries::CountSeries(Topic topic_in, Date start, std::vector<std::int64_t> counts_in)
    : topic(std::move(topic_in)), start_date(start), counts(std::move(counts_in))
{
    if (counts.empty()) {
        throw DataError("count series must cover at least one day");
    }
    for (std::int64_t c : counts) {
        if (c < 0) {
            throw DataError("count series contains a negative count");
        }
    }
}

std::size_t CountSeries::index_of(Date d) const
{
    return static_cast<std::size_t>((d - start_date).count());
}

bool operator==(const CountSeries& a, const CountSeries& b)
{
    return a.topic == b.topic && a.start_date == b.start_date && a.counts == b.counts;
}

GoldStandard::GoldStandard(Topic topic_in, std::vector<Date> dates)
    : topic(std::move(topic_in)), posting_dates(std::move(dates))
{
    std::sort(posting_dates.begin(), posting_dates.end());
    posting_dates.erase(std::unique(posting_dates.begin(), posting_dates.end()),
                        posting_dates.end());
}

bool operator==(const GoldStandard& a, const GoldStandard& b)
{
    return a.topic == b.topic && a.posting_dates == b.posting_dates;
}

CountSeries purge(const CountSeries& series, std::int64_t cutoff)
{
    if (cutoff < 0) {
        throw std::invalid_argument("purge cutoff must be >= 0");
    }
    std::vector<std::int64_t> counts = series.counts;
    for (std::int64_t& c : counts) {
        if (c > 0 && c <= cutoff) {
            c = 0;
        }
    }
    return CountSeries(series.topic, series.start_date, std::move(counts));
}

std::vector<CountSeries> parse_counts(std::istream& in)
{
    static constexpr const char* header[] = {"disease", "country", "date", "count"};

    // key -> (topic as first seen, date -> summed count)
    std::map<std::string, std::pair<Topic, std::map<Date, std::int64_t>>> topics;
    for_each_row(in, header,
                 [&](Topic topic, const std::vector<std::string>& fields, std::size_t line_no) {
                     Date d = parse_date_field(fields[2], line_no);
                     std::int64_t c = parse_count_field(fields[3], line_no);
                     auto [it, inserted] = topics.try_emplace(
                         topic.key(), std::move(topic), std::map<Date, std::int64_t>{});
                     it->second.second[d] += c;
                 });

    std::vector<CountSeries> out;
    out.reserve(topics.size());
    for (auto& [key, entry] : topics) {
        auto& [topic, by_date] = entry;
        Date first = by_date.begin()->first;
        Date last = by_date.rbegin()->first;
        auto n = static_cast<std::size_t>((last - first).count()) + 1;
        std::vector<std::int64_t> counts(n, 0);
        for (auto& [d, c] : by_date) {
            counts[static_cast<std::size_t>((d - first).count())] = c;
        }
        out.emplace_back(std::move(topic), first, std::move(counts));
    }
    return out;
}

std::vector<GoldStandard> parse_gold(std::istream& in)
{
    static constexpr const char* header[] = {"disease", "country", "date"};

    std::map<std::string, std::pair<Topic, std::vector<Date>>> topics;
    for_each_row(in, header,
                 [&](Topic topic, const std::vector<std::string>& fields, std::size_t line_no) {
                     Date d = parse_date_field(fields[2], line_no);
                     auto [it, inserted] =
                         topics.try_emplace(topic.key(), std::move(topic), std::vector<Date>{});
                     it->second.second.push_back(d);
                 });

    std::vector<GoldStandard> out;
    out.reserve(topics.size());
    for (auto& [key, entry] : topics) {
        out.emplace_back(std::move(entry.first), std::move(entry.second));
    }
    return out;
}

void write_counts_csv(std::ostream& out, std::span<const CountSeries> series)
{
    out << "disease,country,date,count\n";
    for (const CountSeries& s : series) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << s.topic.disease << ',' << s.topic.country << ',' << format_date(s.date(i))
                << ',' << s.counts[i] << '\n';
        }
    }
}

void write_gold_csv(std::ostream& out, std::span<const GoldStandard> gold)
{
    out << "disease,country,date\n";
    for (const GoldStandard& g : gold) {
        for (Date d : g.posting_dates) {
            out << g.topic.disease << ',' << g.topic.country << ',' << format_date(d) << '\n';
        }
    }
}

} // namespace abd
