#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "abd/errors.hpp"
#include "abd/tuning.hpp"
#include "support/gen.hpp"

using namespace abd;

namespace {

const Date kStart = make_date(2008, 7, 7); // Monday

CountSeries series_of(std::vector<std::int64_t> counts)
{
    return CountSeries(Topic("dengue", "brazil"), kStart, std::move(counts));
}

GoldStandard gold_at(std::vector<long> offsets)
{
    std::vector<Date> dates;
    for (long o : offsets) {
        dates.push_back(kStart + std::chrono::days(o));
    }
    return GoldStandard(Topic("dengue", "brazil"), std::move(dates));
}

// Alternating 0/8 baseline gives mu = 24/7 and sigma = 4.276 over every
// relevant window, so with k = 0 the day-9 count of 4 scores 0.134 and the
// day-10 count of 5 scores 0.367: one statistic inside each grid gap.
SweepSpec gap_spec()
{
    std::vector<std::int64_t> counts{0, 8, 0, 8, 0, 8, 0, 0, 0, 4, 5, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    SweepSpec spec;
    spec.algorithm = Algorithm::C2;
    spec.base = DetectorConfig::defaults(Algorithm::C2);
    spec.base.k = 0.0;
    spec.threshold_grid = {0.1, 0.2, 0.4};
    spec.training.push_back({series_of(counts), gold_at({16})}); // window 10..16
    return spec;
}

} // namespace

TEST_CASE("sweep picks the unique F1 maximizer")
{
    SweepSpec spec = gap_spec();
    SweepResult result = sweep(spec);

    CHECK(result.best_threshold == doctest::Approx(0.2));
    REQUIRE(result.table.size() == 3);

    // 0.1 admits the day-9 false positive; 0.4 loses the day-10 hit.
    CHECK(result.table[0].report.tally == ConfusionTally{1, 1, 0, 12});
    CHECK(result.table[1].report.tally == ConfusionTally{1, 0, 0, 13});
    CHECK(result.table[2].report.tally == ConfusionTally{0, 0, 1, 13});
    CHECK(*result.table[0].objective_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(*result.table[1].objective_f1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(result.table[2].objective_f1.has_value());

    // Exhaustive recomputation over the grid agrees on the argmax.
    double best = -1.0;
    double best_threshold = 0.0;
    for (double th : spec.threshold_grid) {
        DetectorConfig cfg = spec.base;
        cfg.algorithm = spec.algorithm;
        cfg.threshold = th;
        DetectionResult r = detect(spec.training[0].series, cfg);
        DatasetOutcome o = score(r, spec.training[0].gold, kStart, kStart + std::chrono::days(19));
        EvaluationReport rep = metrics(o.tally, o.days_observed, o.alert_days);
        if (rep.f1 && *rep.f1 >= best) {
            best = *rep.f1;
            best_threshold = th;
        }
    }
    CHECK(result.best_threshold == doctest::Approx(best_threshold));
}

TEST_CASE("sweep ties break toward the larger threshold")
{
    // A single spike at statistic 14: every grid point below it scores
    // F1 = 1, so the largest qualifying point wins.
    std::vector<std::int64_t> counts(20, 0);
    counts[9] = 3;
    SweepSpec spec;
    spec.algorithm = Algorithm::C2;
    spec.base = DetectorConfig::defaults(Algorithm::C2);
    spec.threshold_grid = {0.5, 1.0, 5.0, 13.0};
    spec.training.push_back({series_of(counts), gold_at({12})});
    SweepResult result = sweep(spec);
    CHECK(result.best_threshold == doctest::Approx(13.0));
    for (const SweepRow& row : result.table) {
        CHECK(*row.objective_f1 == doctest::Approx(1.0));
    }
}

TEST_CASE("sweep is invariant to training order")
{
    SweepSpec spec = gap_spec();
    std::vector<std::int64_t> other(30, 0);
    other[12] = 4;
    spec.training.push_back({series_of(other), gold_at({14})});

    SweepSpec reversed = spec;
    std::swap(reversed.training[0], reversed.training[1]);

    SweepResult a = sweep(spec);
    SweepResult b = sweep(reversed);
    CHECK(a.best_threshold == doctest::Approx(b.best_threshold));
    REQUIRE(a.table.size() == b.table.size());
    for (std::size_t i = 0; i < a.table.size(); ++i) {
        CHECK(a.table[i].report.tally == b.table[i].report.tally);
    }
}

TEST_CASE("alert days are non-increasing in the threshold")
{
    for (Algorithm algo :
         {Algorithm::C2, Algorithm::C3, Algorithm::W2, Algorithm::Fstat, Algorithm::Ewma}) {
        DetectorConfig cfg = DetectorConfig::defaults(algo);
        for (std::uint64_t seed = 300; seed < 305; ++seed) {
            DetectionResult base = detect(testgen::random_series(seed, 60), cfg);
            std::int64_t prev = -1;
            for (int i = 0; i <= 20; ++i) {
                double th = 0.05 * i;
                std::int64_t n = rethreshold(base, th).alert_day_count();
                if (prev >= 0) {
                    CHECK(n <= prev);
                }
                prev = n;
            }
        }
    }
}

TEST_CASE("sweep rejects bad specs and uninformative data")
{
    SweepSpec spec = gap_spec();
    spec.threshold_grid = {};
    CHECK_THROWS_AS(sweep(spec), std::invalid_argument);

    spec = gap_spec();
    spec.threshold_grid = {0.2, 0.2};
    CHECK_THROWS_AS(sweep(spec), std::invalid_argument);

    spec = gap_spec();
    spec.training.clear();
    CHECK_THROWS_AS(sweep(spec), std::invalid_argument);

    // No postings: sensitivity is 0/0 everywhere, so F1 never defined.
    spec = gap_spec();
    spec.training[0].gold = gold_at({});
    CHECK_THROWS_AS(sweep(spec), DataError);
}

TEST_CASE("mean objective averages per-dataset F1")
{
    SweepSpec spec = gap_spec();
    // Second dataset: spike hit at every threshold in the grid (F1 = 1).
    std::vector<std::int64_t> counts(20, 0);
    counts[9] = 3;
    spec.training.push_back({series_of(counts), gold_at({12})});
    spec.objective = SweepObjective::MeanF1;
    SweepResult result = sweep(spec);
    REQUIRE(result.table.size() == 3);
    // threshold 0.1: mean of 2/3 and 1. threshold 0.2: mean of 1 and 1.
    // threshold 0.4: dataset one undefined, dataset two still 1.
    CHECK(*result.table[0].objective_f1 == doctest::Approx((2.0 / 3.0 + 1.0) / 2.0));
    CHECK(*result.table[1].objective_f1 == doctest::Approx(1.0));
    CHECK(*result.table[2].objective_f1 == doctest::Approx(1.0));
    // 0.4 ties 0.2 on the mean objective and wins by the tie-break.
    CHECK(result.best_threshold == doctest::Approx(0.4));
}

TEST_CASE("sweep CSV table shape")
{
    SweepResult result = sweep(gap_spec());
    std::ostringstream out;
    out << sweep_csv_header() << '\n';
    for (const SweepRow& row : result.table) {
        write_sweep_csv_row(out, row);
    }
    std::string text = out.str();
    CHECK(text.rfind("threshold,tp,fp,fn,tn,sensitivity,ppv,f1,alarms_per_100_days\n", 0) == 0);
    CHECK(text.find("0.2,1,0,0,13,1,1,1,") != std::string::npos);
}
