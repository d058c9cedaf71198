#pragma once

#include <optional>
#include <vector>

#include "abd/detectors.hpp"
#include "abd/evaluation.hpp"
#include "abd/series.hpp"

namespace abd {

enum class SweepObjective {
    PooledF1, // F1 of the summed tallies (default)
    MeanF1,   // mean of per-dataset F1 over datasets where it is defined
};

struct TrainingPair {
    CountSeries series;
    GoldStandard gold;
};

struct SweepSpec {
    Algorithm algorithm = Algorithm::C2;
    std::vector<double> threshold_grid; // non-empty, strictly increasing
    DetectorConfig base;                // threshold field is ignored
    std::vector<TrainingPair> training; // non-empty
    SweepObjective objective = SweepObjective::PooledF1;
};

struct SweepRow {
    double threshold = 0.0;
    EvaluationReport report;            // aggregated over the training pairs
    std::optional<double> objective_f1; // the value the sweep maximizes
};

struct SweepResult {
    double best_threshold = 0.0;
    std::vector<SweepRow> table;
};

// Evaluate every grid threshold over all training pairs and return the one
// maximizing F1; ties break toward the larger threshold (fewer alarms).
// Statistics are computed once per pair and re-flagged per threshold.
// Throws DataError("no informative threshold") when F1 is undefined at
// every grid point.
SweepResult sweep(const SweepSpec& spec);

// `threshold,tp,fp,fn,tn,sensitivity,ppv,f1,alarms_per_100_days`.
std::string sweep_csv_header();
void write_sweep_csv_row(std::ostream& out, const SweepRow& row);

} // namespace abd
