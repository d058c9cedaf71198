#include "abd/synth.hpp"

#include <cmath>
#include <istream>

#include "abd/errors.hpp"

namespace abd {

namespace {

constexpr double kPoissonChunk = 30.0;

std::int64_t round_nonneg(double v)
{
    return std::llround(std::max(0.0, v));
}

} // namespace

int OutbreakSpec::total_duration_days() const
{
    if (const auto* spike = std::get_if<SpikeShape>(&shape)) {
        return spike->duration_days;
    }
    const auto& slope = std::get<SlopeShape>(shape);
    return slope.rise_days + slope.fall_days;
}

void ScenarioSpec::validate() const
{
    if (length_days < 1) {
        throw DataError("scenario length_days must be >= 1");
    }
    if (!(weekday_mean >= 0.0) || !std::isfinite(weekday_mean) || !(weekend_mean >= 0.0) ||
        !std::isfinite(weekend_mean)) {
        throw DataError("scenario means must be finite and non-negative");
    }
    if (noise != "poisson") {
        throw DataError("unknown noise model '" + noise + "' (only \"poisson\" is supported)");
    }
    for (const OutbreakSpec& o : outbreaks) {
        if (o.onset_day < 0 || o.onset_day + o.total_duration_days() > length_days) {
            throw DataError("outbreak at day " + std::to_string(o.onset_day) +
                            " does not fit inside the series");
        }
        if (o.onset_day + o.gold_lag_days < 0 || o.onset_day + o.gold_lag_days >= length_days) {
            throw DataError("gold posting for outbreak at day " + std::to_string(o.onset_day) +
                            " falls outside the series");
        }
        if (const auto* spike = std::get_if<SpikeShape>(&o.shape)) {
            if (spike->height < 0.0 || spike->duration_days < 1) {
                throw DataError("spike outbreaks need height >= 0 and duration >= 1");
            }
        } else {
            const auto& slope = std::get<SlopeShape>(o.shape);
            if (slope.peak < 0.0 || slope.rise_days < 1 || slope.fall_days < 1) {
                throw DataError("slope outbreaks need peak >= 0 and rise/fall >= 1");
            }
        }
    }
}

double PoissonSampler::next_uniform()
{
    // Top 53 bits -> [0, 1); fixed across platforms.
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::int64_t PoissonSampler::sample(double mean)
{
    if (mean <= 0.0) {
        return 0;
    }
    std::int64_t total = 0;
    double remaining = mean;
    while (remaining > 0.0) {
        double chunk = std::min(remaining, kPoissonChunk);
        remaining -= chunk;
        // Knuth multiplication.
        double limit = std::exp(-chunk);
        double product = 1.0;
        std::int64_t k = -1;
        do {
            ++k;
            product *= next_uniform();
        } while (product > limit);
        total += k;
    }
    return total;
}

std::vector<std::int64_t> outbreak_shape(const OutbreakSpec& outbreak)
{
    std::vector<std::int64_t> shape;
    if (const auto* spike = std::get_if<SpikeShape>(&outbreak.shape)) {
        shape.assign(static_cast<std::size_t>(spike->duration_days),
                     round_nonneg(spike->height));
        return shape;
    }
    const auto& slope = std::get<SlopeShape>(outbreak.shape);
    shape.reserve(static_cast<std::size_t>(slope.rise_days + slope.fall_days));
    for (int j = 1; j <= slope.rise_days; ++j) {
        shape.push_back(round_nonneg(slope.peak * j / slope.rise_days));
    }
    for (int j = 1; j <= slope.fall_days; ++j) {
        shape.push_back(round_nonneg(slope.peak * (1.0 - static_cast<double>(j) / slope.fall_days)));
    }
    return shape;
}

std::pair<CountSeries, GoldStandard> generate(const ScenarioSpec& spec)
{
    spec.validate();
    Topic topic(spec.disease, spec.country);

    PoissonSampler sampler(spec.seed);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(spec.length_days), 0);
    for (int i = 0; i < spec.length_days; ++i) {
        Date d = spec.start_date + std::chrono::days(i);
        counts[static_cast<std::size_t>(i)] =
            sampler.sample(is_weekend(d) ? spec.weekend_mean : spec.weekday_mean);
    }

    std::vector<Date> postings;
    for (const OutbreakSpec& o : spec.outbreaks) {
        std::vector<std::int64_t> shape = outbreak_shape(o);
        for (std::size_t j = 0; j < shape.size(); ++j) {
            counts[static_cast<std::size_t>(o.onset_day) + j] += shape[j];
        }
        postings.push_back(spec.start_date + std::chrono::days(o.onset_day + o.gold_lag_days));
    }

    return {CountSeries(topic, spec.start_date, std::move(counts)),
            GoldStandard(topic, std::move(postings))};
}

CountSeries sink_inject(const CountSeries& series, std::span<const Date> dates)
{
    std::vector<std::int64_t> counts = series.counts;
    for (Date d : dates) {
        if (!series.contains(d)) {
            throw DataError("sink date " + format_date(d) + " is outside the series range");
        }
        counts[series.index_of(d)] = 0;
    }
    return CountSeries(series.topic, series.start_date, std::move(counts));
}

namespace {

OutbreakSpec outbreak_from_json(const nlohmann::json& j)
{
    OutbreakSpec o;
    o.onset_day = j.at("onset_day").get<int>();
    if (j.contains("gold_lag_days")) {
        o.gold_lag_days = j.at("gold_lag_days").get<int>();
    }
    const nlohmann::json& shape = j.at("shape");
    std::string type = shape.at("type").get<std::string>();
    if (type == "spike") {
        SpikeShape s;
        s.height = shape.at("height").get<double>();
        s.duration_days = shape.at("duration_days").get<int>();
        o.shape = s;
    } else if (type == "slope") {
        SlopeShape s;
        s.peak = shape.at("peak").get<double>();
        s.rise_days = shape.at("rise_days").get<int>();
        s.fall_days = shape.at("fall_days").get<int>();
        o.shape = s;
    } else {
        throw DataError("unknown outbreak shape type '" + type + "'");
    }
    return o;
}

} // namespace

ScenarioSpec scenario_from_json(const nlohmann::json& j)
{
    ScenarioSpec spec;
    try {
        spec.length_days = j.at("length_days").get<int>();
        std::string start = j.at("start_date").get<std::string>();
        auto d = parse_date(start);
        if (!d) {
            throw DataError("unparseable start_date '" + start + "'");
        }
        spec.start_date = *d;
        if (j.contains("weekday_mean")) {
            spec.weekday_mean = j.at("weekday_mean").get<double>();
        }
        if (j.contains("weekend_mean")) {
            spec.weekend_mean = j.at("weekend_mean").get<double>();
        }
        if (j.contains("seed")) {
            spec.seed = j.at("seed").get<std::uint64_t>();
        }
        if (j.contains("noise")) {
            spec.noise = j.at("noise").get<std::string>();
        }
        if (j.contains("disease")) {
            spec.disease = j.at("disease").get<std::string>();
        }
        if (j.contains("country")) {
            spec.country = j.at("country").get<std::string>();
        }
        if (j.contains("outbreaks")) {
            for (const nlohmann::json& o : j.at("outbreaks")) {
                spec.outbreaks.push_back(outbreak_from_json(o));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid scenario: ") + e.what());
    }
    spec.validate();
    return spec;
}

ScenarioSpec load_scenario(std::istream& in)
{
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid scenario JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

} // namespace abd
