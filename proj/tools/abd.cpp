// abd: aberration detection over daily disease-country news counts.
//
// Subcommands: detect, evaluate, sweep, simulate, profile. Exit codes:
// 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "abd/detectors.hpp"
#include "abd/errors.hpp"
#include "abd/evaluation.hpp"
#include "abd/series.hpp"
#include "abd/synth.hpp"
#include "abd/tuning.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw abd::DataError("cannot open input file '" + path + "'");
    }
    return in;
}

std::ofstream open_output_file(const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw abd::DataError("cannot open output file '" + path + "'");
    }
    return out;
}

// "-" means stdout.
std::ostream& select_output(const std::string& path, std::ofstream& file)
{
    if (path == "-") {
        return std::cout;
    }
    file = open_output_file(path);
    return file;
}

// Detector flags shared by detect/evaluate/sweep, mirrored 1:1 by the JSON
// config file; flags override the file, the file overrides defaults.
struct DetectorFlags {
    std::string algorithm = "c2";
    double threshold = 0.0;
    int baseline = 7;
    int guard = 2;
    double k = 1.0;
    double lambda = 0.2;
    double sigma_floor = 0.2;
    std::int64_t purge = 2;
    int fstat_test_len = 1;
    std::string w2_strata = "weekday-baseline";

    CLI::Option* opt_algorithm = nullptr;
    CLI::Option* opt_threshold = nullptr;
    CLI::Option* opt_baseline = nullptr;
    CLI::Option* opt_guard = nullptr;
    CLI::Option* opt_k = nullptr;
    CLI::Option* opt_lambda = nullptr;
    CLI::Option* opt_sigma_floor = nullptr;
    CLI::Option* opt_purge = nullptr;
    CLI::Option* opt_fstat_test_len = nullptr;
    CLI::Option* opt_w2_strata = nullptr;
};

void add_detector_flags(CLI::App& cmd, DetectorFlags& f)
{
    f.opt_algorithm = cmd.add_option("--algorithm", f.algorithm, "Detection algorithm")
                          ->check(CLI::IsMember({"c2", "c3", "w2", "fstat", "ewma"}));
    f.opt_threshold =
        cmd.add_option("--threshold", f.threshold, "Alert threshold (default per algorithm)");
    f.opt_baseline = cmd.add_option("--baseline", f.baseline, "Baseline window length in days");
    f.opt_guard = cmd.add_option("--guard", f.guard, "Guard band length in days");
    f.opt_k = cmd.add_option("--k", f.k, "Standard-deviation multiplier");
    f.opt_lambda = cmd.add_option("--lambda", f.lambda, "EWMA smoothing constant in (0,1)");
    f.opt_sigma_floor =
        cmd.add_option("--sigma-floor", f.sigma_floor, "Minimum standard deviation");
    f.opt_purge = cmd.add_option("--purge", f.purge, "Zero out counts <= this cutoff");
    f.opt_fstat_test_len =
        cmd.add_option("--fstat-test-len", f.fstat_test_len, "F-statistic test window length");
    f.opt_w2_strata = cmd.add_option("--w2-strata", f.w2_strata, "W2 weekend-target baseline")
                          ->check(CLI::IsMember({"weekday-baseline", "per-stratum"}));
}

const std::vector<std::string>& known_config_keys()
{
    static const std::vector<std::string> keys = {
        "algorithm",      "threshold", "baseline",  "guard",  "k",    "lambda", "sigma-floor",
        "fstat-test-len", "purge",     "w2-strata", "format", "seed"};
    return keys;
}

nlohmann::json load_config_file(const std::string& path)
{
    if (path.empty()) {
        return nlohmann::json::object();
    }
    std::ifstream in = open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw abd::DataError("invalid config file '" + path + "': " + e.what());
    }
    if (!j.is_object()) {
        throw abd::DataError("config file '" + path + "' must hold a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find(known_config_keys().begin(), known_config_keys().end(), key) ==
            known_config_keys().end()) {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    }
    return j;
}

abd::DetectorConfig build_config(const DetectorFlags& f, const nlohmann::json& file)
{
    std::string algo_name = f.algorithm;
    if (f.opt_algorithm->count() == 0 && file.contains("algorithm")) {
        algo_name = file.at("algorithm").get<std::string>();
    }
    auto algo = abd::algorithm_from_name(algo_name);
    if (!algo) {
        throw std::invalid_argument("unknown algorithm '" + algo_name + "'");
    }
    abd::DetectorConfig cfg = abd::DetectorConfig::defaults(*algo);

    auto merge = [&](const CLI::Option* opt, const char* key, auto flag_value, auto& target) {
        using T = std::decay_t<decltype(target)>;
        if (opt->count() > 0) {
            target = static_cast<T>(flag_value);
        } else if (file.contains(key)) {
            target = file.at(key).get<T>();
        }
    };
    merge(f.opt_threshold, "threshold", f.threshold, cfg.threshold);
    merge(f.opt_baseline, "baseline", f.baseline, cfg.baseline_len);
    merge(f.opt_guard, "guard", f.guard, cfg.guard);
    merge(f.opt_k, "k", f.k, cfg.k);
    merge(f.opt_lambda, "lambda", f.lambda, cfg.lambda);
    merge(f.opt_sigma_floor, "sigma-floor", f.sigma_floor, cfg.sigma_floor);
    merge(f.opt_purge, "purge", f.purge, cfg.purge_cutoff);
    merge(f.opt_fstat_test_len, "fstat-test-len", f.fstat_test_len, cfg.fstat_test_len);

    std::string strata = f.w2_strata;
    if (f.opt_w2_strata->count() == 0 && file.contains("w2-strata")) {
        strata = file.at("w2-strata").get<std::string>();
    }
    if (strata == "weekday-baseline") {
        cfg.w2_strata = abd::W2Strata::WeekdayBaseline;
    } else if (strata == "per-stratum") {
        cfg.w2_strata = abd::W2Strata::PerStratum;
    } else {
        throw std::invalid_argument("unknown w2-strata mode '" + strata + "'");
    }

    cfg.validate();
    return cfg;
}

std::string pick_format(const CLI::Option* opt, const std::string& flag_value,
                        const nlohmann::json& file)
{
    std::string format = flag_value;
    if (opt->count() == 0 && file.contains("format")) {
        format = file.at("format").get<std::string>();
    }
    if (format != "csv" && format != "json") {
        throw std::invalid_argument("format must be csv or json");
    }
    return format;
}

// ---- detect ----------------------------------------------------------

int run_detect(const std::string& input, const std::string& output, const DetectorFlags& flags,
               const std::string& config_path)
{
    abd::DetectorConfig cfg = build_config(flags, load_config_file(config_path));
    std::ifstream in = open_input(input);
    std::vector<abd::CountSeries> all = abd::parse_counts(in);

    std::ofstream file;
    std::ostream& out = select_output(output, file);
    out << "disease,country,date,count,statistic,alert\n";
    for (const abd::CountSeries& series : all) {
        abd::DetectionResult result = abd::detect(series, cfg);
        for (std::size_t i = 0; i < series.size(); ++i) {
            out << series.topic.disease << ',' << series.topic.country << ','
                << abd::format_date(series.date(i)) << ',' << series.counts[i] << ',';
            if (result.statistic[i]) {
                out << format_double(*result.statistic[i]);
            }
            out << ',' << (result.alert[i] ? "true" : "false") << '\n';
        }
    }
    return kExitOk;
}

// ---- evaluate --------------------------------------------------------

struct TopicReport {
    abd::Topic topic;
    abd::EvaluationReport report;
};

// Per-topic evaluation over each topic's full date range. Topics missing
// from the gold file are scored against zero postings; gold topics missing
// from the counts are an error.
std::pair<std::vector<TopicReport>, abd::EvaluationReport>
evaluate_all(const std::vector<abd::CountSeries>& counts,
             const std::vector<abd::GoldStandard>& gold, const abd::DetectorConfig& cfg)
{
    std::map<std::string, const abd::GoldStandard*> gold_by_key;
    for (const abd::GoldStandard& g : gold) {
        gold_by_key[g.topic.key()] = &g;
    }
    std::map<std::string, const abd::CountSeries*> counts_by_key;
    for (const abd::CountSeries& s : counts) {
        counts_by_key[s.topic.key()] = &s;
    }
    for (const abd::GoldStandard& g : gold) {
        if (!counts_by_key.contains(g.topic.key())) {
            throw abd::DataError("gold topic '" + g.topic.disease + "," + g.topic.country +
                                 "' has no count series");
        }
    }

    std::vector<TopicReport> reports;
    std::vector<abd::DatasetOutcome> outcomes;
    for (const abd::CountSeries& series : counts) {
        abd::DetectionResult result = abd::detect(series, cfg);
        auto it = gold_by_key.find(series.topic.key());
        abd::GoldStandard empty(series.topic, {});
        const abd::GoldStandard& g = it != gold_by_key.end() ? *it->second : empty;
        abd::DatasetOutcome outcome =
            abd::score(result, g, series.start_date, series.end_date());
        outcomes.push_back(outcome);
        reports.push_back(
            {series.topic, abd::metrics(outcome.tally, outcome.days_observed, outcome.alert_days)});
    }
    return {std::move(reports), abd::aggregate(outcomes)};
}

int run_evaluate(const std::string& counts_path, const std::string& gold_path,
                 const std::string& output, const std::string& format, const DetectorFlags& flags,
                 const std::string& config_path)
{
    abd::DetectorConfig cfg = build_config(flags, load_config_file(config_path));
    std::ifstream counts_in = open_input(counts_path);
    std::vector<abd::CountSeries> counts = abd::parse_counts(counts_in);
    if (counts.empty()) {
        throw abd::DataError("no count series in '" + counts_path + "'");
    }
    std::ifstream gold_in = open_input(gold_path);
    std::vector<abd::GoldStandard> gold = abd::parse_gold(gold_in);

    auto [reports, total] = evaluate_all(counts, gold, cfg);

    std::ofstream file;
    std::ostream& out = select_output(output, file);
    if (format == "json") {
        nlohmann::json j;
        j["algorithm"] = abd::algorithm_name(cfg.algorithm);
        j["datasets"] = nlohmann::json::array();
        for (const TopicReport& r : reports) {
            nlohmann::json entry = abd::report_to_json(r.report);
            entry["disease"] = r.topic.disease;
            entry["country"] = r.topic.country;
            j["datasets"].push_back(std::move(entry));
        }
        j["aggregate"] = abd::report_to_json(total);
        out << j.dump(2) << '\n';
    } else {
        out << abd::report_csv_header() << '\n';
        for (const TopicReport& r : reports) {
            abd::write_report_csv_row(out, r.topic.disease, r.topic.country, r.report);
        }
        abd::write_report_csv_row(out, "ALL", "ALL", total);
    }
    return kExitOk;
}

// ---- sweep -----------------------------------------------------------

int run_sweep(const std::string& counts_path, const std::string& gold_path,
              const std::vector<double>& thresholds, const std::string& objective,
              const std::string& output, const std::string& format, const DetectorFlags& flags,
              const std::string& config_path)
{
    nlohmann::json config_json = load_config_file(config_path);
    abd::DetectorConfig cfg = build_config(flags, config_json);

    std::ifstream counts_in = open_input(counts_path);
    std::vector<abd::CountSeries> counts = abd::parse_counts(counts_in);
    if (counts.empty()) {
        throw abd::DataError("no count series in '" + counts_path + "'");
    }
    std::ifstream gold_in = open_input(gold_path);
    std::vector<abd::GoldStandard> gold = abd::parse_gold(gold_in);

    std::map<std::string, abd::GoldStandard> gold_by_key;
    for (abd::GoldStandard& g : gold) {
        if (std::none_of(counts.begin(), counts.end(),
                         [&](const abd::CountSeries& s) { return s.topic == g.topic; })) {
            throw abd::DataError("gold topic '" + g.topic.disease + "," + g.topic.country +
                                 "' has no count series");
        }
        gold_by_key.emplace(g.topic.key(), std::move(g));
    }

    abd::SweepSpec spec;
    spec.algorithm = cfg.algorithm;
    spec.threshold_grid = thresholds;
    spec.base = cfg;
    spec.objective =
        objective == "mean" ? abd::SweepObjective::MeanF1 : abd::SweepObjective::PooledF1;
    for (abd::CountSeries& series : counts) {
        auto it = gold_by_key.find(series.topic.key());
        abd::GoldStandard g =
            it != gold_by_key.end() ? it->second : abd::GoldStandard(series.topic, {});
        spec.training.push_back({std::move(series), std::move(g)});
    }

    abd::SweepResult result = abd::sweep(spec);

    std::ofstream file;
    std::ostream& out = select_output(output, file);
    if (format == "json") {
        nlohmann::json j;
        j["algorithm"] = abd::algorithm_name(cfg.algorithm);
        j["objective"] = objective;
        j["best_threshold"] = result.best_threshold;
        j["table"] = nlohmann::json::array();
        for (const abd::SweepRow& row : result.table) {
            nlohmann::json entry = abd::report_to_json(row.report);
            entry["threshold"] = row.threshold;
            entry["objective_f1"] =
                row.objective_f1 ? nlohmann::json(*row.objective_f1) : nlohmann::json(nullptr);
            j["table"].push_back(std::move(entry));
        }
        out << j.dump(2) << '\n';
    } else {
        out << abd::sweep_csv_header() << '\n';
        for (const abd::SweepRow& row : result.table) {
            abd::write_sweep_csv_row(out, row);
        }
        std::cerr << "best threshold: " << format_double(result.best_threshold) << '\n';
    }
    return kExitOk;
}

// ---- simulate --------------------------------------------------------

int run_simulate(const std::string& scenario_path, const std::string& out_counts,
                 const std::string& out_gold, const CLI::Option* opt_seed, std::uint64_t seed,
                 const std::string& config_path)
{
    nlohmann::json config_json = load_config_file(config_path);
    std::ifstream in = open_input(scenario_path);
    abd::ScenarioSpec spec = abd::load_scenario(in);
    if (opt_seed->count() > 0) {
        spec.seed = seed;
    } else if (config_json.contains("seed")) {
        spec.seed = config_json.at("seed").get<std::uint64_t>();
    }

    auto [series, gold] = abd::generate(spec);

    std::ofstream counts_out = open_output_file(out_counts);
    abd::write_counts_csv(counts_out, {&series, 1});
    std::ofstream gold_out = open_output_file(out_gold);
    abd::write_gold_csv(gold_out, {&gold, 1});
    return kExitOk;
}

// ---- profile ---------------------------------------------------------

// Counts input gives the mean count per weekday; detect output (recognized
// by its extra `alert` column) gives the mean alert rate per weekday.
int run_profile(const std::string& input, const std::string& output)
{
    std::ifstream probe = open_input(input);
    std::string header;
    std::getline(probe, header);
    bool alerts_mode = header.find("alert") != std::string::npos;
    probe.close();

    std::ifstream in = open_input(input);
    std::array<double, 7> profile{};
    if (!alerts_mode) {
        std::vector<abd::CountSeries> counts = abd::parse_counts(in);
        profile = abd::weekday_count_profile(counts);
    } else {
        // Reuse the counts parser for dates/topics; re-scan for the alert column.
        std::array<double, 7> alerted{};
        std::array<double, 7> days{};
        std::string line;
        std::getline(in, line); // header
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::vector<std::string> cols;
        std::stringstream hs(line);
        std::string col;
        while (std::getline(hs, col, ',')) {
            cols.push_back(col);
        }
        auto alert_col = std::find(cols.begin(), cols.end(), "alert") - cols.begin();
        auto date_col = std::find(cols.begin(), cols.end(), "date") - cols.begin();
        if (alert_col >= static_cast<long>(cols.size()) ||
            date_col >= static_cast<long>(cols.size())) {
            throw abd::DataError("alert listing needs 'date' and 'alert' columns");
        }
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty()) {
                continue;
            }
            std::vector<std::string> fields;
            std::stringstream ls(line);
            while (std::getline(ls, col, ',')) {
                fields.push_back(col);
            }
            while (fields.size() < cols.size()) {
                fields.emplace_back(); // trailing empty fields
            }
            if (fields.size() != cols.size()) {
                throw abd::ParseError(line_no, "row has " + std::to_string(fields.size()) +
                                                   " columns, expected " +
                                                   std::to_string(cols.size()));
            }
            auto d = abd::parse_date(fields[static_cast<std::size_t>(date_col)]);
            if (!d) {
                throw abd::ParseError(line_no, "unparseable date '" +
                                                   fields[static_cast<std::size_t>(date_col)] +
                                                   "'");
            }
            int w = abd::weekday_index(*d);
            days[static_cast<std::size_t>(w)] += 1.0;
            if (fields[static_cast<std::size_t>(alert_col)] == "true") {
                alerted[static_cast<std::size_t>(w)] += 1.0;
            }
        }
        for (std::size_t w = 0; w < 7; ++w) {
            profile[w] = days[w] > 0.0 ? alerted[w] / days[w] : 0.0;
        }
    }

    std::ofstream file;
    std::ostream& out = select_output(output, file);
    out << "weekday,mean_value\n";
    for (int w = 0; w < 7; ++w) {
        out << abd::weekday_name(w) << ',' << format_double(profile[static_cast<std::size_t>(w)])
            << '\n';
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Aberration detection over daily disease-country news counts"};
    app.require_subcommand(1);

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "Flag aberrant days in a counts CSV");
    std::string detect_input;
    std::string detect_output = "-";
    std::string detect_config;
    DetectorFlags detect_flags;
    detect_cmd->add_option("--input", detect_input, "Counts CSV")->required();
    detect_cmd->add_option("--output", detect_output, "Output path, - for stdout");
    detect_cmd->add_option("--config", detect_config, "JSON config file");
    add_detector_flags(*detect_cmd, detect_flags);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Score alerts against gold postings");
    std::string eval_counts;
    std::string eval_gold;
    std::string eval_output = "-";
    std::string eval_format = "csv";
    std::string eval_config;
    DetectorFlags eval_flags;
    eval_cmd->add_option("--counts", eval_counts, "Counts CSV")->required();
    eval_cmd->add_option("--gold", eval_gold, "Gold postings CSV")->required();
    eval_cmd->add_option("--output", eval_output, "Output path, - for stdout");
    CLI::Option* eval_format_opt =
        eval_cmd->add_option("--format", eval_format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    eval_cmd->add_option("--config", eval_config, "JSON config file");
    add_detector_flags(*eval_cmd, eval_flags);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Grid-search the alert threshold for best F1");
    std::string sweep_counts;
    std::string sweep_gold;
    std::vector<double> sweep_thresholds;
    std::string sweep_objective = "pooled";
    std::string sweep_output = "-";
    std::string sweep_format = "csv";
    std::string sweep_config;
    DetectorFlags sweep_flags;
    sweep_cmd->add_option("--counts", sweep_counts, "Counts CSV")->required();
    sweep_cmd->add_option("--gold", sweep_gold, "Gold postings CSV")->required();
    sweep_cmd->add_option("--thresholds", sweep_thresholds, "Comma-separated ascending grid")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--objective", sweep_objective, "pooled or mean F1")
        ->check(CLI::IsMember({"pooled", "mean"}));
    sweep_cmd->add_option("--output", sweep_output, "Output path, - for stdout");
    CLI::Option* sweep_format_opt =
        sweep_cmd->add_option("--format", sweep_format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    sweep_cmd->add_option("--config", sweep_config, "JSON config file");
    add_detector_flags(*sweep_cmd, sweep_flags);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic counts+gold fixture");
    std::string sim_scenario;
    std::string sim_counts;
    std::string sim_gold;
    std::string sim_config;
    std::uint64_t sim_seed = 0;
    sim_cmd->add_option("--scenario", sim_scenario, "Scenario JSON")->required();
    sim_cmd->add_option("--out-counts", sim_counts, "Counts CSV to write")->required();
    sim_cmd->add_option("--out-gold", sim_gold, "Gold CSV to write")->required();
    CLI::Option* sim_seed_opt =
        sim_cmd->add_option("--seed", sim_seed, "Override the scenario seed");
    sim_cmd->add_option("--config", sim_config, "JSON config file");

    // profile
    auto* profile_cmd =
        app.add_subcommand("profile", "Weekday profile of counts or of alert listings");
    std::string profile_input;
    std::string profile_output = "-";
    profile_cmd->add_option("--input", profile_input, "Counts CSV or detect output")->required();
    profile_cmd->add_option("--output", profile_output, "Output path, - for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(detect_cmd)) {
            return run_detect(detect_input, detect_output, detect_flags, detect_config);
        }
        if (app.got_subcommand(eval_cmd)) {
            std::string format =
                pick_format(eval_format_opt, eval_format, load_config_file(eval_config));
            return run_evaluate(eval_counts, eval_gold, eval_output, format, eval_flags,
                                eval_config);
        }
        if (app.got_subcommand(sweep_cmd)) {
            std::string format =
                pick_format(sweep_format_opt, sweep_format, load_config_file(sweep_config));
            return run_sweep(sweep_counts, sweep_gold, sweep_thresholds, sweep_objective,
                             sweep_output, format, sweep_flags, sweep_config);
        }
        if (app.got_subcommand(sim_cmd)) {
            return run_simulate(sim_scenario, sim_counts, sim_gold, sim_seed_opt, sim_seed,
                                sim_config);
        }
        if (app.got_subcommand(profile_cmd)) {
            return run_profile(profile_input, profile_output);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const abd::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
