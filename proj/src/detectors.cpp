#include "abd/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace abd {

namespace {

// max(0, (C - (mu + k*sigma)) / sigma); sigma is already floored.
double c2_formula(double count, double mean, double stdev, double k)
{
    return std::max(0.0, (count - (mean + k * stdev)) / stdev);
}

double sample_stdev(std::span<const std::int64_t> values, double mean)
{
    double acc = 0.0;
    for (std::int64_t v : values) {
        double d = static_cast<double>(v) - mean;
        acc += d * d;
    }
    return std::sqrt(acc / (static_cast<double>(values.size()) - 1.0));
}

double ewma_scale(double lambda)
{
    return std::sqrt(lambda / (2.0 - lambda));
}

// Prefix sums over the purged counts; integer counts keep them exact in
// doubles up to 2^53.
struct PrefixSums {
    std::vector<double> sum;
    std::vector<double> sumsq;

    explicit PrefixSums(std::span<const std::int64_t> counts)
        : sum(counts.size() + 1, 0.0), sumsq(counts.size() + 1, 0.0)
    {
        for (std::size_t i = 0; i < counts.size(); ++i) {
            auto v = static_cast<double>(counts[i]);
            sum[i + 1] = sum[i] + v;
            sumsq[i + 1] = sumsq[i] + v * v;
        }
    }

    // [first, last] inclusive
    double range_sum(int first, int last) const { return sum[last + 1] - sum[first]; }
    double range_sumsq(int first, int last) const { return sumsq[last + 1] - sumsq[first]; }
};

struct WindowStats {
    double mean;
    double stdev; // floored
};

WindowStats window_stats(const PrefixSums& ps, int first, int last, double sigma_floor)
{
    auto n = static_cast<double>(last - first + 1);
    double s = ps.range_sum(first, last);
    double sq = ps.range_sumsq(first, last);
    double mean = s / n;
    double var = (sq - s * mean) / (n - 1.0);
    double stdev = std::sqrt(std::max(0.0, var));
    return {mean, std::max(sigma_floor, stdev)};
}

// Indices and value prefix sums of one weekday/weekend stratum.
struct Stratum {
    std::vector<int> indices;
    std::vector<double> sum;
    std::vector<double> sumsq;

    void build(const CountSeries& purged, bool weekend)
    {
        for (std::size_t i = 0; i < purged.size(); ++i) {
            if (is_weekend(purged.date(i)) == weekend) {
                indices.push_back(static_cast<int>(i));
            }
        }
        sum.assign(indices.size() + 1, 0.0);
        sumsq.assign(indices.size() + 1, 0.0);
        for (std::size_t j = 0; j < indices.size(); ++j) {
            auto v = static_cast<double>(purged.counts[static_cast<std::size_t>(indices[j])]);
            sum[j + 1] = sum[j] + v;
            sumsq[j + 1] = sumsq[j] + v * v;
        }
    }

    // Stats over the `len` stratum members closest below `cutoff_index`,
    // or nullopt when fewer exist. `pos` is the number of members with
    // index < cutoff_index (maintained by the caller).
    std::optional<WindowStats> trailing_stats(std::size_t pos, int len, double sigma_floor) const
    {
        if (pos < static_cast<std::size_t>(len)) {
            return std::nullopt;
        }
        auto n = static_cast<double>(len);
        double s = sum[pos] - sum[pos - static_cast<std::size_t>(len)];
        double sq = sumsq[pos] - sumsq[pos - static_cast<std::size_t>(len)];
        double mean = s / n;
        double var = (sq - s * mean) / (n - 1.0);
        double stdev = std::sqrt(std::max(0.0, var));
        return WindowStats{mean, std::max(sigma_floor, stdev)};
    }
};

int first_defined_day(const DetectorConfig& cfg)
{
    return cfg.baseline_len + cfg.guard;
}

std::vector<std::optional<double>> run_c2(const CountSeries& purged, const DetectorConfig& cfg)
{
    auto n = static_cast<int>(purged.size());
    PrefixSums ps(purged.counts);
    std::vector<std::optional<double>> stats(purged.size());
    for (int t = first_defined_day(cfg); t < n; ++t) {
        auto w = window_stats(ps, t - cfg.guard - cfg.baseline_len, t - cfg.guard - 1,
                              cfg.sigma_floor);
        stats[static_cast<std::size_t>(t)] =
            c2_formula(static_cast<double>(purged.counts[static_cast<std::size_t>(t)]), w.mean,
                       w.stdev, cfg.k);
    }
    return stats;
}

std::vector<std::optional<double>> run_c3(const CountSeries& purged, const DetectorConfig& cfg)
{
    auto n = static_cast<int>(purged.size());
    PrefixSums ps(purged.counts);
    int first = first_defined_day(cfg);

    std::vector<double> s(purged.size(), 0.0);
    std::vector<bool> quiet(purged.size(), false); // count <= mu + 3*sigma on that day
    for (int t = first; t < n; ++t) {
        auto w = window_stats(ps, t - cfg.guard - cfg.baseline_len, t - cfg.guard - 1,
                              cfg.sigma_floor);
        auto u = static_cast<std::size_t>(t);
        auto count = static_cast<double>(purged.counts[u]);
        s[u] = c2_formula(count, w.mean, w.stdev, cfg.k);
        quiet[u] = count <= w.mean + 3.0 * w.stdev;
    }

    std::vector<std::optional<double>> stats(purged.size());
    for (int t = first; t < n; ++t) {
        double total = s[static_cast<std::size_t>(t)];
        for (int back = 1; back <= 2; ++back) {
            int d = t - back;
            if (d >= first && quiet[static_cast<std::size_t>(d)]) {
                total += s[static_cast<std::size_t>(d)];
            }
        }
        stats[static_cast<std::size_t>(t)] = total;
    }
    return stats;
}

std::vector<std::optional<double>> run_w2(const CountSeries& purged, const DetectorConfig& cfg)
{
    auto n = static_cast<int>(purged.size());
    Stratum strata[2];
    strata[0].build(purged, false);
    strata[1].build(purged, true);
    std::size_t pos[2] = {0, 0};

    std::vector<std::optional<double>> stats(purged.size());
    for (int t = 0; t < n; ++t) {
        int cutoff = t - cfg.guard;
        for (int s = 0; s < 2; ++s) {
            while (pos[s] < strata[s].indices.size() && strata[s].indices[pos[s]] < cutoff) {
                ++pos[s];
            }
        }
        bool weekend_target =
            cfg.w2_strata == W2Strata::PerStratum && is_weekend(purged.date(static_cast<std::size_t>(t)));
        int s = weekend_target ? 1 : 0;
        auto w = strata[s].trailing_stats(pos[s], cfg.baseline_len, cfg.sigma_floor);
        if (!w) {
            continue;
        }
        stats[static_cast<std::size_t>(t)] =
            c2_formula(static_cast<double>(purged.counts[static_cast<std::size_t>(t)]), w->mean,
                       w->stdev, cfg.k);
    }
    return stats;
}

std::vector<std::optional<double>> run_fstat(const CountSeries& purged, const DetectorConfig& cfg)
{
    auto n = static_cast<int>(purged.size());
    PrefixSums ps(purged.counts);
    double floor2 = cfg.sigma_floor * cfg.sigma_floor;
    auto nb = static_cast<double>(cfg.baseline_len);
    auto nt = static_cast<double>(cfg.fstat_test_len);

    std::vector<std::optional<double>> stats(purged.size());
    for (int t = std::max(first_defined_day(cfg), cfg.fstat_test_len - 1); t < n; ++t) {
        int bfirst = t - cfg.guard - cfg.baseline_len;
        int blast = t - cfg.guard - 1;
        double mu = ps.range_sum(bfirst, blast) / nb;
        // Both variances are centered on the baseline mean, population form.
        double var_b =
            (ps.range_sumsq(bfirst, blast) - 2.0 * mu * ps.range_sum(bfirst, blast) + nb * mu * mu) /
            nb;
        int tfirst = t - cfg.fstat_test_len + 1;
        double var_t =
            (ps.range_sumsq(tfirst, t) - 2.0 * mu * ps.range_sum(tfirst, t) + nt * mu * mu) / nt;
        stats[static_cast<std::size_t>(t)] =
            std::max(0.0, var_t) / std::max(floor2, std::max(0.0, var_b));
    }
    return stats;
}

std::vector<std::optional<double>> run_ewma(const CountSeries& purged, const DetectorConfig& cfg)
{
    auto n = static_cast<int>(purged.size());
    PrefixSums ps(purged.counts);
    std::vector<double> y = ewma_smooth(purged.counts, cfg.lambda);
    double scale = ewma_scale(cfg.lambda);

    std::vector<std::optional<double>> stats(purged.size());
    for (int t = first_defined_day(cfg); t < n; ++t) {
        auto w = window_stats(ps, t - cfg.guard - cfg.baseline_len, t - cfg.guard - 1,
                              cfg.sigma_floor);
        stats[static_cast<std::size_t>(t)] =
            (y[static_cast<std::size_t>(t)] - w.mean) / (w.stdev * scale);
    }
    return stats;
}

} // namespace

const char* algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::C2:
        return "c2";
    case Algorithm::C3:
        return "c3";
    case Algorithm::W2:
        return "w2";
    case Algorithm::Fstat:
        return "fstat";
    case Algorithm::Ewma:
        return "ewma";
    }
    return "?";
}

std::optional<Algorithm> algorithm_from_name(std::string_view name)
{
    if (name == "c2") {
        return Algorithm::C2;
    }
    if (name == "c3") {
        return Algorithm::C3;
    }
    if (name == "w2") {
        return Algorithm::W2;
    }
    if (name == "fstat") {
        return Algorithm::Fstat;
    }
    if (name == "ewma") {
        return Algorithm::Ewma;
    }
    return std::nullopt;
}

double DetectorConfig::default_threshold(Algorithm a)
{
    switch (a) {
    case Algorithm::C2:
        return 0.2;
    case Algorithm::C3:
        return 0.3;
    case Algorithm::W2:
        return 0.2;
    case Algorithm::Fstat:
        return 0.6;
    case Algorithm::Ewma:
        return 2.0;
    }
    return 0.2;
}

DetectorConfig DetectorConfig::defaults(Algorithm a)
{
    DetectorConfig cfg;
    cfg.algorithm = a;
    cfg.threshold = default_threshold(a);
    return cfg;
}

void DetectorConfig::validate() const
{
    if (baseline_len < 2) {
        throw std::invalid_argument("baseline_len must be >= 2");
    }
    if (guard < 0) {
        throw std::invalid_argument("guard must be >= 0");
    }
    if (!(lambda > 0.0) || !(lambda < 1.0)) {
        throw std::invalid_argument("lambda must lie in (0, 1)");
    }
    if (!(sigma_floor > 0.0) || !std::isfinite(sigma_floor)) {
        throw std::invalid_argument("sigma_floor must be > 0");
    }
    if (fstat_test_len < 1) {
        throw std::invalid_argument("fstat_test_len must be >= 1");
    }
    if (purge_cutoff < 0) {
        throw std::invalid_argument("purge_cutoff must be >= 0");
    }
    if (!std::isfinite(k)) {
        throw std::invalid_argument("k must be finite");
    }
    if (std::isnan(threshold)) {
        throw std::invalid_argument("threshold must not be NaN");
    }
}

std::int64_t DetectionResult::alert_day_count() const
{
    return std::count(alert.begin(), alert.end(), true);
}

std::optional<BaselineStats> baseline(const CountSeries& purged, int t, const DetectorConfig& cfg)
{
    cfg.validate();
    if (t < 0 || static_cast<std::size_t>(t) >= purged.size()) {
        throw std::invalid_argument("day index out of range");
    }
    int first = t - cfg.guard - cfg.baseline_len;
    if (first < 0) {
        return std::nullopt; // warm-up: insufficient history
    }
    BaselineStats stats;
    stats.window_indices.resize(static_cast<std::size_t>(cfg.baseline_len));
    std::iota(stats.window_indices.begin(), stats.window_indices.end(), first);
    std::span<const std::int64_t> window(purged.counts.data() + first,
                                         static_cast<std::size_t>(cfg.baseline_len));
    double sum = 0.0;
    for (std::int64_t v : window) {
        sum += static_cast<double>(v);
    }
    stats.mean = sum / static_cast<double>(cfg.baseline_len);
    stats.stdev = std::max(cfg.sigma_floor, sample_stdev(window, stats.mean));
    return stats;
}

std::optional<double> c2_stat(const CountSeries& purged, int t, const DetectorConfig& cfg)
{
    auto b = baseline(purged, t, cfg);
    if (!b) {
        return std::nullopt;
    }
    return c2_formula(static_cast<double>(purged.counts[static_cast<std::size_t>(t)]), b->mean,
                      b->stdev, cfg.k);
}

std::optional<double> c3_stat(const CountSeries& purged, int t, const DetectorConfig& cfg)
{
    auto own = c2_stat(purged, t, cfg);
    if (!own) {
        return std::nullopt;
    }
    double total = *own;
    for (int back = 1; back <= 2; ++back) {
        int d = t - back;
        if (d < 0) {
            continue;
        }
        auto b = baseline(purged, d, cfg);
        if (!b) {
            continue;
        }
        auto count = static_cast<double>(purged.counts[static_cast<std::size_t>(d)]);
        if (count <= b->mean + 3.0 * b->stdev) {
            total += c2_formula(count, b->mean, b->stdev, cfg.k);
        }
    }
    return total;
}

std::optional<double> w2_stat(const CountSeries& purged, int t, const DetectorConfig& cfg)
{
    cfg.validate();
    if (t < 0 || static_cast<std::size_t>(t) >= purged.size()) {
        throw std::invalid_argument("day index out of range");
    }
    bool weekend_stratum =
        cfg.w2_strata == W2Strata::PerStratum && is_weekend(purged.date(static_cast<std::size_t>(t)));
    int cutoff = t - cfg.guard;
    std::vector<std::int64_t> window;
    for (int i = cutoff - 1; i >= 0 && window.size() < static_cast<std::size_t>(cfg.baseline_len);
         --i) {
        if (is_weekend(purged.date(static_cast<std::size_t>(i))) == weekend_stratum) {
            window.push_back(purged.counts[static_cast<std::size_t>(i)]);
        }
    }
    if (window.size() < static_cast<std::size_t>(cfg.baseline_len)) {
        return std::nullopt;
    }
    double sum = 0.0;
    for (std::int64_t v : window) {
        sum += static_cast<double>(v);
    }
    double mean = sum / static_cast<double>(cfg.baseline_len);
    double stdev = std::max(cfg.sigma_floor, sample_stdev(window, mean));
    return c2_formula(static_cast<double>(purged.counts[static_cast<std::size_t>(t)]), mean, stdev,
                      cfg.k);
}

std::optional<double> fstat(const CountSeries& purged, int t, const DetectorConfig& cfg)
{
    auto b = baseline(purged, t, cfg);
    if (!b) {
        return std::nullopt;
    }
    if (t - cfg.fstat_test_len + 1 < 0) {
        return std::nullopt;
    }
    double mu = b->mean;
    double acc_b = 0.0;
    for (int i : b->window_indices) {
        double d = static_cast<double>(purged.counts[static_cast<std::size_t>(i)]) - mu;
        acc_b += d * d;
    }
    double var_b = acc_b / static_cast<double>(cfg.baseline_len);
    double acc_t = 0.0;
    for (int i = t - cfg.fstat_test_len + 1; i <= t; ++i) {
        double d = static_cast<double>(purged.counts[static_cast<std::size_t>(i)]) - mu;
        acc_t += d * d;
    }
    double var_t = acc_t / static_cast<double>(cfg.fstat_test_len);
    return var_t / std::max(cfg.sigma_floor * cfg.sigma_floor, var_b);
}

std::optional<double> ewma_stat(const CountSeries& purged, int t, const DetectorConfig& cfg)
{
    auto b = baseline(purged, t, cfg);
    if (!b) {
        return std::nullopt;
    }
    std::vector<double> y = ewma_smooth(purged.counts, cfg.lambda);
    return (y[static_cast<std::size_t>(t)] - b->mean) / (b->stdev * ewma_scale(cfg.lambda));
}

std::vector<double> ewma_smooth(std::span<const std::int64_t> counts, double lambda)
{
    std::vector<double> y(counts.size());
    if (counts.empty()) {
        return y;
    }
    y[0] = static_cast<double>(counts[0]);
    for (std::size_t i = 1; i < counts.size(); ++i) {
        y[i] = lambda * static_cast<double>(counts[i]) + (1.0 - lambda) * y[i - 1];
    }
    return y;
}

DetectionResult detect(const CountSeries& series, const DetectorConfig& cfg)
{
    cfg.validate();
    CountSeries purged = purge(series, cfg.purge_cutoff);

    std::vector<std::optional<double>> stats;
    switch (cfg.algorithm) {
    case Algorithm::C2:
        stats = run_c2(purged, cfg);
        break;
    case Algorithm::C3:
        stats = run_c3(purged, cfg);
        break;
    case Algorithm::W2:
        stats = run_w2(purged, cfg);
        break;
    case Algorithm::Fstat:
        stats = run_fstat(purged, cfg);
        break;
    case Algorithm::Ewma:
        stats = run_ewma(purged, cfg);
        break;
    }

    DetectionResult result{series.topic, series.start_date, std::move(stats),
                           std::vector<bool>(series.size(), false), cfg};
    for (std::size_t i = 0; i < result.statistic.size(); ++i) {
        result.alert[i] = result.statistic[i].has_value() && *result.statistic[i] > cfg.threshold;
    }
    return result;
}

DetectionResult rethreshold(DetectionResult result, double threshold)
{
    result.config.threshold = threshold;
    for (std::size_t i = 0; i < result.statistic.size(); ++i) {
        result.alert[i] = result.statistic[i].has_value() && *result.statistic[i] > threshold;
    }
    return result;
}

} // namespace abd
