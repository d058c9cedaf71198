#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "abd/series.hpp"

namespace abd {

enum class Algorithm { C2, C3, W2, Fstat, Ewma };

const char* algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(std::string_view name);

// Baseline choice for W2 target days.
enum class W2Strata {
    // Last N weekdays form the baseline for every target day, weekday or
    // weekend.
    WeekdayBaseline,
    // Weekend targets use the last N weekend days instead.
    PerStratum,
};

struct DetectorConfig {
    Algorithm algorithm = Algorithm::C2;
    int baseline_len = 7;
    int guard = 2;
    double k = 1.0;
    double lambda = 0.2;
    double sigma_floor = 0.2;
    double threshold = 0.2;
    int fstat_test_len = 1;
    std::int64_t purge_cutoff = 2;
    W2Strata w2_strata = W2Strata::WeekdayBaseline;

    // Published defaults, including the per-algorithm tuned threshold:
    // 0.2 (C2), 0.3 (C3), 0.2 (W2), 0.6 (F-statistic), 2.0 (EWMA).
    static DetectorConfig defaults(Algorithm a);
    static double default_threshold(Algorithm a);

    // Throws std::invalid_argument on violated invariants
    // (baseline_len >= 2, guard >= 0, 0 < lambda < 1, sigma_floor > 0,
    // fstat_test_len >= 1, purge_cutoff >= 0, finite k).
    void validate() const;
};

struct BaselineStats {
    double mean = 0.0;
    double stdev = 0.0; // floored at sigma_floor
    std::vector<int> window_indices;
};

struct DetectionResult {
    Topic topic;
    Date start_date;
    // One entry per series day; disengaged during warm-up.
    std::vector<std::optional<double>> statistic;
    // alert[i] iff statistic[i] is defined and > config.threshold.
    std::vector<bool> alert;
    DetectorConfig config;

    std::size_t size() const { return statistic.size(); }
    Date date(std::size_t i) const { return start_date + std::chrono::days(static_cast<long>(i)); }
    std::int64_t alert_day_count() const;
};

// Per-day operations. All of them take the already-purged series (detect()
// applies the purge once up front). A disengaged optional means day t is
// still in warm-up. t must index into the series.
//
// baseline: mean and sample standard deviation (n-1 denominator, floored at
// sigma_floor) over the window [t - guard - baseline_len, t - guard - 1].
std::optional<BaselineStats> baseline(const CountSeries& purged, int t, const DetectorConfig& cfg);

// C2: max(0, (C_t - (mu + k*sigma)) / sigma).
std::optional<double> c2_stat(const CountSeries& purged, int t, const DetectorConfig& cfg);

// C3: S_t plus S_{t-1} and S_{t-2}, each prior term included only when that
// day has a baseline of its own and its count does not exceed its
// mu + 3*sigma. Defined from the same day as C2; missing prior terms are
// omitted so C3 alerts at least as often as C2.
std::optional<double> c3_stat(const CountSeries& purged, int t, const DetectorConfig& cfg);

// W2: same formula as C2 with the baseline drawn from the most recent
// baseline_len weekdays before the guard (or the matching stratum under
// W2Strata::PerStratum). Computed for weekday and weekend targets alike.
std::optional<double> w2_stat(const CountSeries& purged, int t, const DetectorConfig& cfg);

// Moving F-statistic: ratio of test-window to baseline-window variance,
// both centered on the baseline mean and population (1/n) normalized; the
// baseline variance is floored at sigma_floor^2. Test window is the
// fstat_test_len days ending at t.
std::optional<double> fstat(const CountSeries& purged, int t, const DetectorConfig& cfg);

// EWMA: smoothed counts Y_1 = C_1, Y_t = lambda*C_t + (1-lambda)*Y_{t-1}
// over the whole purged series; S_t = (Y_t - mu) / (sigma * sqrt(lambda/(2-lambda)))
// with mu, sigma from baseline() on the purged counts.
std::optional<double> ewma_stat(const CountSeries& purged, int t, const DetectorConfig& cfg);

// The smoothing recursion by itself.
std::vector<double> ewma_smooth(std::span<const std::int64_t> counts, double lambda);

// Purge once, evaluate the configured statistic for every day, flag alerts
// where the statistic strictly exceeds the threshold. Warm-up days get an
// undefined statistic and no alert. Pure function; uses sliding prefix sums
// internally but matches the per-day operations exactly.
DetectionResult detect(const CountSeries& series, const DetectorConfig& cfg);

// Statistics do not depend on the threshold, so sweeping thresholds only
// needs the alerts re-flagged.
DetectionResult rethreshold(DetectionResult result, double threshold);

} // namespace abd
