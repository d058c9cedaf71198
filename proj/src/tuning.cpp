#include "abd/tuning.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "abd/errors.hpp"

namespace abd {

namespace {

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::optional<double> mean_f1(std::span<const DatasetOutcome> outcomes)
{
    double sum = 0.0;
    int defined = 0;
    for (const DatasetOutcome& o : outcomes) {
        EvaluationReport r = metrics(o.tally, o.days_observed, o.alert_days);
        if (r.f1) {
            sum += *r.f1;
            ++defined;
        }
    }
    if (defined == 0) {
        return std::nullopt;
    }
    return sum / defined;
}

} // namespace

SweepResult sweep(const SweepSpec& spec)
{
    if (spec.threshold_grid.empty()) {
        throw std::invalid_argument("threshold grid must be non-empty");
    }
    if (std::adjacent_find(spec.threshold_grid.begin(), spec.threshold_grid.end(),
                           [](double a, double b) { return b <= a; }) !=
        spec.threshold_grid.end()) {
        throw std::invalid_argument("threshold grid must be strictly increasing");
    }
    if (spec.training.empty()) {
        throw std::invalid_argument("training set must be non-empty");
    }

    DetectorConfig cfg = spec.base;
    cfg.algorithm = spec.algorithm;
    cfg.validate();

    // Statistics are threshold-independent; compute them once per pair.
    std::vector<DetectionResult> results;
    results.reserve(spec.training.size());
    for (const TrainingPair& pair : spec.training) {
        results.push_back(detect(pair.series, cfg));
    }

    SweepResult out;
    std::optional<double> best_f1;
    for (double threshold : spec.threshold_grid) {
        std::vector<DatasetOutcome> outcomes;
        outcomes.reserve(spec.training.size());
        for (std::size_t i = 0; i < spec.training.size(); ++i) {
            DetectionResult flagged = rethreshold(results[i], threshold);
            const CountSeries& series = spec.training[i].series;
            outcomes.push_back(
                score(flagged, spec.training[i].gold, series.start_date, series.end_date()));
        }
        SweepRow row;
        row.threshold = threshold;
        row.report = aggregate(outcomes);
        row.objective_f1 =
            spec.objective == SweepObjective::PooledF1 ? row.report.f1 : mean_f1(outcomes);

        // Ties break toward the larger threshold (fewer alarms), so >= on an
        // ascending grid.
        if (row.objective_f1 && (!best_f1 || *row.objective_f1 >= *best_f1)) {
            best_f1 = row.objective_f1;
            out.best_threshold = threshold;
        }
        out.table.push_back(std::move(row));
    }

    if (!best_f1) {
        throw DataError("no informative threshold: F1 is undefined at every grid point");
    }
    return out;
}

std::string sweep_csv_header()
{
    return "threshold,tp,fp,fn,tn,sensitivity,ppv,f1,alarms_per_100_days";
}

void write_sweep_csv_row(std::ostream& out, const SweepRow& row)
{
    const EvaluationReport& r = row.report;
    out << format_double(row.threshold) << ',' << r.tally.tp << ',' << r.tally.fp << ','
        << r.tally.fn << ',' << r.tally.tn << ',';
    if (r.sensitivity) {
        out << format_double(r.sensitivity->value);
    }
    out << ',';
    if (r.ppv) {
        out << format_double(r.ppv->value);
    }
    out << ',';
    if (r.f1) {
        out << format_double(*r.f1);
    }
    out << ',' << format_double(r.alarms_per_100_days) << '\n';
}

} // namespace abd
