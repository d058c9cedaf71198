#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>

#include "json.hpp"

#include "abd/detectors.hpp"
#include "abd/series.hpp"

namespace abd {

// The 7 calendar days ending at and including a gold posting.
struct QualifyingWindow {
    static constexpr int length = 7;

    Date posting_date;

    Date first_day() const { return posting_date - std::chrono::days(length - 1); }
    Date last_day() const { return posting_date; }
    bool covers(Date d) const { return d >= first_day() && d <= last_day(); }
};

struct ConfusionTally {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
};

bool operator==(const ConfusionTally& a, const ConfusionTally& b);

// A proportion with its Wilson 95% interval.
struct MetricEstimate {
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct EvaluationReport {
    ConfusionTally tally;
    // Disengaged when the metric's denominator is zero; never coerced to 0.
    std::optional<MetricEstimate> sensitivity;
    std::optional<MetricEstimate> specificity;
    std::optional<MetricEstimate> ppv;
    std::optional<MetricEstimate> npv;
    std::optional<double> f1;
    double alarms_per_100_days = 0.0;
    std::int64_t days_observed = 0;
    std::int64_t alert_days = 0;
};

// Wilson score 95% interval for successes out of n (n > 0).
MetricEstimate wilson_interval(std::int64_t successes, std::int64_t n);

// Score alerts against gold postings over [period_first, period_last]
// (inclusive; must lie within the result's date range, and every posting
// must fall inside the period). Per posting: TP if any alert day falls in
// its qualifying window, else FN; one alert may credit several overlapping
// windows. Days outside every window count FP when alerted, TN otherwise;
// days inside a window never contribute to FP or TN.
ConfusionTally align(const DetectionResult& result, const GoldStandard& gold,
                     Date period_first, Date period_last);

// The metric suite over one tally. days_observed > 0; alert_days is the
// number of alerted days in the period (alarms_per_100_days numerator).
EvaluationReport metrics(const ConfusionTally& tally, std::int64_t days_observed,
                         std::int64_t alert_days);

// align() plus the day bookkeeping metrics() needs.
struct DatasetOutcome {
    ConfusionTally tally;
    std::int64_t days_observed = 0;
    std::int64_t alert_days = 0;
};

DatasetOutcome score(const DetectionResult& result, const GoldStandard& gold,
                     Date period_first, Date period_last);

// Pool tallies across datasets, then metrics(); alarms_per_100_days is the
// mean of the per-dataset rates rather than the pooled rate.
EvaluationReport aggregate(std::span<const DatasetOutcome> outcomes);

// Mean alerts per weekday (Mon..Sun) across all results: alerts on that
// weekday divided by occurrences of that weekday. 0 for weekdays that never
// occur.
std::array<double, 7> weekday_profile(std::span<const DetectionResult> results);

// Same aggregation over raw counts, for the weekday/weekend volume contrast.
std::array<double, 7> weekday_count_profile(std::span<const CountSeries> series);

// JSON object with tally integers, each proportion as
// {value, ci_low, ci_high} or null, f1 as number or null, and
// alarms_per_100_days.
nlohmann::json report_to_json(const EvaluationReport& report);

// One-row-per-dataset CSV with the same columns.
std::string report_csv_header();
void write_report_csv_row(std::ostream& out, std::string_view disease,
                          std::string_view country, const EvaluationReport& report);

} // namespace abd
