#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "abd/dates.hpp"
#include "abd/series.hpp"

namespace abd {

struct SpikeShape {
    double height = 0.0;
    int duration_days = 1;
};

struct SlopeShape {
    double peak = 0.0;
    int rise_days = 1;
    int fall_days = 1;
};

struct OutbreakSpec {
    int onset_day = 0;
    std::variant<SpikeShape, SlopeShape> shape = SpikeShape{};
    // Gold posting lands at onset_day + gold_lag_days.
    int gold_lag_days = 3;

    int total_duration_days() const;
};

struct ScenarioSpec {
    int length_days = 1;
    Date start_date = make_date(2008, 6, 17);
    double weekday_mean = 1.37;
    double weekend_mean = 0.49;
    std::vector<OutbreakSpec> outbreaks;
    std::uint64_t seed = 0;
    // Baseline noise family; only "poisson" is implemented. Named so
    // alternatives (negative binomial) can be added without changing the
    // file format.
    std::string noise = "poisson";
    std::string disease = "synthetic";
    std::string country = "synthetic";

    void validate() const; // throws DataError
};

// Portable Poisson sampling on a fixed generator, so identical seeds give
// identical fixtures on every platform and in reimplementations:
// mt19937_64, uniforms from the top 53 bits ((x >> 11) * 2^-53), Knuth
// multiplication, splitting means into chunks of at most 30 via
// Poisson(a+b) = Poisson(a) + Poisson(b).
class PoissonSampler {
public:
    explicit PoissonSampler(std::uint64_t seed) : rng_(seed) {}

    std::int64_t sample(double mean);

private:
    double next_uniform();

    std::mt19937_64 rng_;
};

// Deterministic daily outbreak contribution: SPIKE adds round(height) for
// duration_days; SLOPE ramps linearly up to the peak over rise_days and
// back down over fall_days, rounded per day.
std::vector<std::int64_t> outbreak_shape(const OutbreakSpec& outbreak);

// Per-day Poisson noise at the stratum mean (weekday vs weekend) plus the
// outbreak contributions; gold postings at onset + gold_lag. Pure function
// of the spec: identical spec (seed included) gives identical output.
std::pair<CountSeries, GoldStandard> generate(const ScenarioSpec& spec);

// Counts on the given dates forced to 0. Out-of-range dates are an error.
CountSeries sink_inject(const CountSeries& series, std::span<const Date> dates);

// JSON mirroring the ScenarioSpec field names; see README for the schema.
ScenarioSpec scenario_from_json(const nlohmann::json& j);
ScenarioSpec load_scenario(std::istream& in);

} // namespace abd
