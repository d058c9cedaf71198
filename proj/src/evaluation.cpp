#include "abd/evaluation.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "abd/errors.hpp"

namespace abd {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::optional<MetricEstimate> proportion(std::int64_t numerator, std::int64_t denominator)
{
    if (denominator == 0) {
        return std::nullopt;
    }
    return wilson_interval(numerator, denominator);
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void append_metric_cells(std::ostream& out, const std::optional<MetricEstimate>& m)
{
    if (m) {
        out << ',' << format_double(m->value) << ',' << format_double(m->ci_low) << ','
            << format_double(m->ci_high);
    } else {
        out << ",,,";
    }
}

nlohmann::json metric_to_json(const std::optional<MetricEstimate>& m)
{
    if (!m) {
        return nullptr;
    }
    return {{"value", m->value}, {"ci_low", m->ci_low}, {"ci_high", m->ci_high}};
}

} // namespace

bool operator==(const ConfusionTally& a, const ConfusionTally& b)
{
    return a.tp == b.tp && a.fp == b.fp && a.fn == b.fn && a.tn == b.tn;
}

MetricEstimate wilson_interval(std::int64_t successes, std::int64_t n)
{
    if (n <= 0) {
        throw std::invalid_argument("wilson_interval needs n > 0");
    }
    double nn = static_cast<double>(n);
    double p = static_cast<double>(successes) / nn;
    double z2 = kZ95 * kZ95;
    double denom = 1.0 + z2 / nn;
    double center = (p + z2 / (2.0 * nn)) / denom;
    double half = kZ95 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {p, center - half, center + half};
}

ConfusionTally align(const DetectionResult& result, const GoldStandard& gold, Date period_first,
                     Date period_last)
{
    if (result.topic != gold.topic) {
        throw DataError("topic mismatch: alerts are for " + result.topic.key() +
                        ", gold is for " + gold.topic.key());
    }
    Date series_first = result.start_date;
    Date series_last = result.date(result.size() - 1);
    if (period_first > period_last || period_first < series_first || period_last > series_last) {
        throw std::invalid_argument("evaluation period must lie within the series date range");
    }

    auto day_index = [&](Date d) {
        return static_cast<std::size_t>((d - series_first).count());
    };

    auto n_days = static_cast<std::size_t>((period_last - period_first).count()) + 1;
    std::vector<char> in_window(n_days, 0);

    ConfusionTally tally;
    for (Date posting : gold.posting_dates) {
        if (posting < period_first || posting > period_last) {
            throw DataError("gold posting " + format_date(posting) + " for " + gold.topic.key() +
                            " falls outside the evaluation period");
        }
        QualifyingWindow window{posting};
        bool hit = false;
        for (Date d = std::max(window.first_day(), period_first); d <= window.last_day();
             d += std::chrono::days(1)) {
            in_window[day_index(d) - day_index(period_first)] = 1;
            if (result.alert[day_index(d)]) {
                hit = true;
            }
        }
        if (hit) {
            ++tally.tp;
        } else {
            ++tally.fn;
        }
    }

    for (std::size_t i = 0; i < n_days; ++i) {
        if (in_window[i]) {
            continue;
        }
        if (result.alert[day_index(period_first) + i]) {
            ++tally.fp;
        } else {
            ++tally.tn;
        }
    }
    return tally;
}

EvaluationReport metrics(const ConfusionTally& tally, std::int64_t days_observed,
                         std::int64_t alert_days)
{
    if (days_observed <= 0) {
        throw std::invalid_argument("days_observed must be > 0");
    }
    EvaluationReport report;
    report.tally = tally;
    report.days_observed = days_observed;
    report.alert_days = alert_days;
    report.sensitivity = proportion(tally.tp, tally.tp + tally.fn);
    report.specificity = proportion(tally.tn, tally.tn + tally.fp);
    report.ppv = proportion(tally.tp, tally.tp + tally.fp);
    report.npv = proportion(tally.tn, tally.tn + tally.fn);
    if (report.ppv && report.sensitivity) {
        double p = report.ppv->value;
        double s = report.sensitivity->value;
        if (p + s > 0.0) {
            report.f1 = 2.0 * p * s / (p + s);
        }
    }
    report.alarms_per_100_days =
        100.0 * static_cast<double>(alert_days) / static_cast<double>(days_observed);
    return report;
}

DatasetOutcome score(const DetectionResult& result, const GoldStandard& gold, Date period_first,
                     Date period_last)
{
    DatasetOutcome outcome;
    outcome.tally = align(result, gold, period_first, period_last);
    outcome.days_observed = (period_last - period_first).count() + 1;
    std::size_t first = static_cast<std::size_t>((period_first - result.start_date).count());
    for (std::size_t i = 0; i < static_cast<std::size_t>(outcome.days_observed); ++i) {
        if (result.alert[first + i]) {
            ++outcome.alert_days;
        }
    }
    return outcome;
}

EvaluationReport aggregate(std::span<const DatasetOutcome> outcomes)
{
    if (outcomes.empty()) {
        throw std::invalid_argument("aggregate needs at least one dataset");
    }
    ConfusionTally pooled;
    std::int64_t days = 0;
    std::int64_t alerts = 0;
    double rate_sum = 0.0;
    for (const DatasetOutcome& o : outcomes) {
        pooled.tp += o.tally.tp;
        pooled.fp += o.tally.fp;
        pooled.fn += o.tally.fn;
        pooled.tn += o.tally.tn;
        days += o.days_observed;
        alerts += o.alert_days;
        rate_sum += 100.0 * static_cast<double>(o.alert_days) / static_cast<double>(o.days_observed);
    }
    EvaluationReport report = metrics(pooled, days, alerts);
    // The alarm rate aggregates as a mean of per-dataset rates, not pooled.
    report.alarms_per_100_days = rate_sum / static_cast<double>(outcomes.size());
    return report;
}

std::array<double, 7> weekday_profile(std::span<const DetectionResult> results)
{
    std::array<double, 7> totals{};
    std::array<double, 7> days{};
    for (const DetectionResult& r : results) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            int w = weekday_index(r.date(i));
            days[static_cast<std::size_t>(w)] += 1.0;
            if (r.alert[i]) {
                totals[static_cast<std::size_t>(w)] += 1.0;
            }
        }
    }
    std::array<double, 7> profile{};
    for (std::size_t w = 0; w < 7; ++w) {
        profile[w] = days[w] > 0.0 ? totals[w] / days[w] : 0.0;
    }
    return profile;
}

std::array<double, 7> weekday_count_profile(std::span<const CountSeries> series)
{
    std::array<double, 7> totals{};
    std::array<double, 7> days{};
    for (const CountSeries& s : series) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            int w = s.weekday(i);
            days[static_cast<std::size_t>(w)] += 1.0;
            totals[static_cast<std::size_t>(w)] += static_cast<double>(s.counts[i]);
        }
    }
    std::array<double, 7> profile{};
    for (std::size_t w = 0; w < 7; ++w) {
        profile[w] = days[w] > 0.0 ? totals[w] / days[w] : 0.0;
    }
    return profile;
}

nlohmann::json report_to_json(const EvaluationReport& report)
{
    nlohmann::json j;
    j["tally"] = {{"tp", report.tally.tp},
                  {"fp", report.tally.fp},
                  {"fn", report.tally.fn},
                  {"tn", report.tally.tn}};
    j["sensitivity"] = metric_to_json(report.sensitivity);
    j["specificity"] = metric_to_json(report.specificity);
    j["ppv"] = metric_to_json(report.ppv);
    j["npv"] = metric_to_json(report.npv);
    j["f1"] = report.f1 ? nlohmann::json(*report.f1) : nlohmann::json(nullptr);
    j["alarms_per_100_days"] = report.alarms_per_100_days;
    j["days_observed"] = report.days_observed;
    j["alert_days"] = report.alert_days;
    return j;
}

std::string report_csv_header()
{
    return "disease,country,days,alerts,tp,fp,fn,tn,"
           "sensitivity,sensitivity_ci_low,sensitivity_ci_high,"
           "specificity,specificity_ci_low,specificity_ci_high,"
           "ppv,ppv_ci_low,ppv_ci_high,"
           "npv,npv_ci_low,npv_ci_high,"
           "f1,alarms_per_100_days";
}

void write_report_csv_row(std::ostream& out, std::string_view disease, std::string_view country,
                          const EvaluationReport& report)
{
    out << disease << ',' << country << ',' << report.days_observed << ',' << report.alert_days
        << ',' << report.tally.tp << ',' << report.tally.fp << ',' << report.tally.fn << ','
        << report.tally.tn;
    append_metric_cells(out, report.sensitivity);
    append_metric_cells(out, report.specificity);
    append_metric_cells(out, report.ppv);
    append_metric_cells(out, report.npv);
    if (report.f1) {
        out << ',' << format_double(*report.f1);
    } else {
        out << ',';
    }
    out << ',' << format_double(report.alarms_per_100_days) << '\n';
}

} // namespace abd
