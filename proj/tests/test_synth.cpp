#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "abd/errors.hpp"
#include "abd/evaluation.hpp"
#include "abd/synth.hpp"

using namespace abd;

namespace {

ScenarioSpec base_spec()
{
    ScenarioSpec spec;
    spec.length_days = 60;
    spec.start_date = make_date(2008, 6, 17);
    spec.seed = 12345;
    return spec;
}

} // namespace

TEST_CASE("noiseless spike scenario")
{
    ScenarioSpec spec = base_spec();
    spec.weekday_mean = 0.0;
    spec.weekend_mean = 0.0;
    spec.outbreaks.push_back({20, SpikeShape{5.0, 1}, 0});
    auto [series, gold] = generate(spec);
    for (std::size_t i = 0; i < series.size(); ++i) {
        CHECK(series.counts[i] == (i == 20 ? 5 : 0));
    }
    REQUIRE(gold.posting_dates.size() == 1);
    CHECK(gold.posting_dates[0] == spec.start_date + std::chrono::days(20));
}

TEST_CASE("outbreak shapes")
{
    CHECK(outbreak_shape({0, SpikeShape{9.0, 2}, 0}) == std::vector<std::int64_t>{9, 9});
    CHECK(outbreak_shape({0, SlopeShape{6.0, 3, 3}, 0}) ==
          std::vector<std::int64_t>{2, 4, 6, 4, 2, 0});
    CHECK(outbreak_shape({0, SlopeShape{5.0, 2, 4}, 0}) ==
          std::vector<std::int64_t>{3, 5, 4, 3, 1, 0});
}

TEST_CASE("identical specs generate identical fixtures")
{
    ScenarioSpec spec = base_spec();
    spec.outbreaks.push_back({30, SlopeShape{6.0, 3, 3}, 2});
    auto [s1, g1] = generate(spec);
    auto [s2, g2] = generate(spec);
    CHECK(s1 == s2);
    CHECK(g1 == g2);

    std::ostringstream a;
    std::ostringstream b;
    write_counts_csv(a, {&s1, 1});
    write_counts_csv(b, {&s2, 1});
    CHECK(a.str() == b.str());

    spec.seed = 54321;
    auto [s3, g3] = generate(spec);
    CHECK_FALSE(s1 == s3);
}

TEST_CASE("outbreak contribution is exactly additive")
{
    ScenarioSpec quiet = base_spec();
    ScenarioSpec loud = base_spec();
    loud.outbreaks.push_back({10, SpikeShape{9.0, 2}, 0});
    loud.outbreaks.push_back({30, SlopeShape{6.0, 3, 3}, 1});
    auto [qs, qg] = generate(quiet);
    auto [ls, lg] = generate(loud);
    REQUIRE(qs.size() == ls.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
        std::int64_t expected = 0;
        if (i == 10 || i == 11) {
            expected = 9;
        }
        if (i >= 30 && i < 36) {
            expected = std::vector<std::int64_t>{2, 4, 6, 4, 2, 0}[i - 30];
        }
        CHECK(ls.counts[i] - qs.counts[i] == expected);
    }
    CHECK(qg.posting_dates.empty());
    REQUIRE(lg.posting_dates.size() == 2);
}

TEST_CASE("counts are non-negative integers and postings in range")
{
    ScenarioSpec spec = base_spec();
    spec.length_days = 400;
    spec.outbreaks.push_back({100, SpikeShape{12.0, 3}, 7});
    auto [series, gold] = generate(spec);
    for (std::int64_t c : series.counts) {
        CHECK(c >= 0);
    }
    for (Date d : gold.posting_dates) {
        CHECK(series.contains(d));
    }
}

TEST_CASE("empirical stratum means approach the configured ones")
{
    ScenarioSpec spec = base_spec();
    spec.length_days = 10000;
    spec.seed = 424242;
    auto [series, gold] = generate(spec);
    double weekday_sum = 0.0;
    double weekend_sum = 0.0;
    int weekday_n = 0;
    int weekend_n = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (is_weekend(series.date(i))) {
            weekend_sum += static_cast<double>(series.counts[i]);
            ++weekend_n;
        } else {
            weekday_sum += static_cast<double>(series.counts[i]);
            ++weekday_n;
        }
    }
    CHECK(weekday_sum / weekday_n == doctest::Approx(1.37).epsilon(0.05));
    CHECK(weekend_sum / weekend_n == doctest::Approx(0.49).epsilon(0.10));

    // Day-of-week volume contrast: weekday over weekend mean near 2.8.
    std::array<double, 7> profile = weekday_count_profile({&series, 1});
    double weekday_avg = (profile[0] + profile[1] + profile[2] + profile[3] + profile[4]) / 5.0;
    double weekend_avg = (profile[5] + profile[6]) / 2.0;
    double ratio = weekday_avg / weekend_avg;
    CHECK(ratio > 2.5);
    CHECK(ratio < 3.1);
}

TEST_CASE("poisson sampler is deterministic per seed")
{
    PoissonSampler a(7);
    PoissonSampler b(7);
    PoissonSampler c(8);
    bool all_equal = true;
    bool any_diff = false;
    for (int i = 0; i < 200; ++i) {
        std::int64_t va = a.sample(1.37);
        all_equal = all_equal && va == b.sample(1.37);
        any_diff = any_diff || va != c.sample(1.37);
    }
    CHECK(all_equal);
    CHECK(any_diff);
    PoissonSampler zero(9);
    CHECK(zero.sample(0.0) == 0);
}

TEST_CASE("poisson sampler handles large means via chunking")
{
    PoissonSampler s(11);
    double sum = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        sum += static_cast<double>(s.sample(75.0));
    }
    double mean = sum / n;
    // 5 sigma band: sd of the mean is sqrt(75/2000) = 0.19.
    CHECK(mean == doctest::Approx(75.0).epsilon(0.02));
}

TEST_CASE("sink_inject zeroes the given dates")
{
    ScenarioSpec spec = base_spec();
    spec.weekday_mean = 3.0;
    spec.weekend_mean = 3.0;
    auto [series, gold] = generate(spec);

    std::vector<Date> weekends;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (is_weekend(series.date(i))) {
            weekends.push_back(series.date(i));
        }
    }
    CountSeries sunk = sink_inject(series, weekends);
    for (std::size_t i = 0; i < sunk.size(); ++i) {
        if (is_weekend(sunk.date(i))) {
            CHECK(sunk.counts[i] == 0);
        } else {
            CHECK(sunk.counts[i] == series.counts[i]);
        }
    }

    CHECK(sink_inject(series, {}) == series);
    CHECK(sink_inject(sunk, weekends) == sunk);

    Date outside = series.end_date() + std::chrono::days(1);
    CHECK_THROWS_AS(sink_inject(series, {&outside, 1}), DataError);
}

TEST_CASE("scenario specs validate")
{
    ScenarioSpec spec = base_spec();
    spec.outbreaks.push_back({58, SpikeShape{5.0, 4}, 0}); // runs past the end
    CHECK_THROWS_AS(spec.validate(), DataError);

    spec = base_spec();
    spec.outbreaks.push_back({55, SpikeShape{5.0, 1}, 30}); // posting past the end
    CHECK_THROWS_AS(spec.validate(), DataError);

    spec = base_spec();
    spec.noise = "cauchy";
    CHECK_THROWS_AS(spec.validate(), DataError);

    spec = base_spec();
    spec.weekday_mean = -1.0;
    CHECK_THROWS_AS(spec.validate(), DataError);
}

TEST_CASE("scenario JSON round trip")
{
    nlohmann::json j = {
        {"length_days", 90},
        {"start_date", "2008-06-17"},
        {"weekday_mean", 2.0},
        {"weekend_mean", 0.5},
        {"seed", 99},
        {"disease", "cholera"},
        {"country", "iraq"},
        {"outbreaks",
         {{{"onset_day", 40},
           {"gold_lag_days", 1},
           {"shape", {{"type", "spike"}, {"height", 8.0}, {"duration_days", 2}}}},
          {{"onset_day", 60},
           {"shape", {{"type", "slope"}, {"peak", 6.0}, {"rise_days", 3}, {"fall_days", 3}}}}}},
    };
    ScenarioSpec spec = scenario_from_json(j);
    CHECK(spec.length_days == 90);
    CHECK(spec.weekday_mean == doctest::Approx(2.0));
    CHECK(spec.seed == 99);
    CHECK(spec.disease == "cholera");
    REQUIRE(spec.outbreaks.size() == 2);
    CHECK(spec.outbreaks[0].gold_lag_days == 1);
    CHECK(spec.outbreaks[1].gold_lag_days == 3); // default
    CHECK(std::holds_alternative<SlopeShape>(spec.outbreaks[1].shape));

    auto [series, gold] = generate(spec);
    CHECK(series.topic.key() == "cholera|iraq");

    SUBCASE("defaults")
    {
        nlohmann::json minimal = {{"length_days", 10}, {"start_date", "2009-01-01"}};
        ScenarioSpec m = scenario_from_json(minimal);
        CHECK(m.weekday_mean == doctest::Approx(1.37));
        CHECK(m.weekend_mean == doctest::Approx(0.49));
        CHECK(m.noise == "poisson");
        CHECK(m.disease == "synthetic");
    }

    SUBCASE("bad inputs")
    {
        CHECK_THROWS_AS(scenario_from_json({{"length_days", 10}}), DataError);
        CHECK_THROWS_AS(
            scenario_from_json({{"length_days", 10}, {"start_date", "2008-13-40"}}), DataError);
        std::istringstream bad("{ not json");
        CHECK_THROWS_AS(load_scenario(bad), DataError);
    }
}
