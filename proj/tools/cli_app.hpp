#pragma once

// Command-line front end. Kept in a header so the test suite can drive it
// in-process; tools/main.cpp is a two-line wrapper.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reflex_smas/reflex_smas.hpp"

namespace reflex_smas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Every knob a command can take. Defaults reproduce the published
/// experimental protocol.
struct CliConfig {
    std::string fixture;
    std::string scenario_path;
    std::uint64_t seed = kDefaultSeed;
    double threshold_lo = 0.45;
    double threshold_hi = 0.65;
    std::size_t measures_per_tick = 3;
    std::vector<std::string> measures;
    std::size_t convergence_streak = 3;
    std::size_t patience = 10;
    std::size_t max_ticks = 500;
    long long sims = 10;
    double cutoff = 0.5;
    long long repetitions = 1;
    long long sweep_repetitions = 30;
    long long reproduce_repetitions = 3;
    std::size_t workers = 1;
    std::uint64_t stream = 0;
    std::vector<long long> sims_values{3, 10};
    std::string out;
    std::string out_csv;
    std::string trace;
    std::string report;
};

inline std::uint64_t seed_from_env() {
    if (const char* env = std::getenv("REFLEX_SM_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw UsageError(std::string("REFLEX_SM_SEED is not an unsigned integer: '") + env + "'");
    }
    return kDefaultSeed;
}

inline SimulationConfig simulation_config(const CliConfig& c) {
    SimulationConfig cfg;
    if (!(0.0 <= c.threshold_lo && c.threshold_lo <= c.threshold_hi && c.threshold_hi <= 1.0))
        throw UsageError("--threshold-lo/--threshold-hi must satisfy 0 <= lo <= hi <= 1");
    cfg.threshold_interval = ThresholdInterval(c.threshold_lo, c.threshold_hi);
    if (!c.measures.empty()) {
        cfg.measure_pool.clear();
        for (const auto& name : c.measures) {
            const auto m = parse_measure(name);
            if (!m) throw UsageError("--measures: unknown measure '" + name + "'");
            cfg.measure_pool.push_back(*m);
        }
    }
    cfg.measures_per_tick = c.measures_per_tick;
    cfg.convergence_streak = c.convergence_streak;
    cfg.patience = c.patience;
    cfg.max_ticks = c.max_ticks;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

inline MetaConfig meta_config(const CliConfig& c) {
    if (c.sims < 1) throw UsageError("--sims must be >= 1");
    if (!(c.cutoff > 0.0 && c.cutoff <= 1.0)) throw UsageError("--cutoff must be in (0, 1]");
    if (c.repetitions < 1) throw UsageError("--repetitions must be >= 1");
    if (c.workers < 1) throw UsageError("--workers must be >= 1");
    MetaConfig m;
    m.n_simulations = static_cast<std::size_t>(c.sims);
    m.frequency_cutoff = c.cutoff;
    m.base = simulation_config(c);
    m.seed = c.seed;
    return m;
}

inline Scenario resolve_scenario(const CliConfig& c) {
    if (!c.fixture.empty() && !c.scenario_path.empty())
        throw UsageError("--fixture and --scenario are mutually exclusive");
    if (!c.fixture.empty()) {
        if (auto s = find_fixture(c.fixture)) return *s;
        throw UsageError("unknown fixture '" + c.fixture + "' (try: person, order, travel)");
    }
    if (c.scenario_path.empty()) throw UsageError("one of --fixture or --scenario is required");
    try {
        return load_scenario(c.scenario_path);
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline nlohmann::json config_json(const MetaConfig& m, std::size_t repetitions) {
    auto pool = nlohmann::json::array();
    for (MeasureId id : m.base.measure_pool) pool.push_back(measure_name(id));
    return {{"seed", m.seed},
            {"n_simulations", m.n_simulations},
            {"repetitions", repetitions},
            {"frequency_cutoff", m.frequency_cutoff},
            {"threshold_lo", m.base.threshold_interval.lo},
            {"threshold_hi", m.base.threshold_interval.hi},
            {"measures_per_tick", m.base.measures_per_tick},
            {"measures", pool},
            {"convergence_streak", m.base.convergence_streak},
            {"patience", m.base.patience},
            {"max_ticks", m.base.max_ticks}};
}

/// The document written by `meta --out`: scenario identity and ground
/// truth, the configuration, every MetaReport and the repeatability tally.
inline nlohmann::json meta_document(const Scenario& s, const MetaConfig& m, const RepeatedMeta& rep) {
    auto expected = nlohmann::json::array();
    for (const auto& [a, b] : s.expected.pairs) expected.push_back({a, b});
    auto reports = nlohmann::json::array();
    for (const auto& r : rep.reports) reports.push_back(to_json(r));
    auto repeat = nlohmann::json::array();
    for (const auto& [pair, count] : rep.selection_count)
        repeat.push_back({{"source", pair.first}, {"target", pair.second}, {"count", count}});
    return {{"scenario", s.name},
            {"expected", expected},
            {"config", config_json(m, rep.reports.size())},
            {"reports", reports},
            {"repeatability", repeat}};
}

inline std::vector<ExperimentRow> eval_document(const nlohmann::json& doc) {
    GroundTruthMapping expected;
    for (const auto& p : doc.at("expected")) expected.pairs.emplace(p.at(0).get<std::string>(), p.at(1).get<std::string>());
    const auto name = doc.at("scenario").get<std::string>();
    std::vector<ExperimentRow> rows;
    std::size_t idx = 0;
    for (const auto& report : doc.at("reports")) {
        std::set<IdPair> found;
        for (const auto& p : report.at("final_matching"))
            found.emplace(p.at(0).get<std::string>(), p.at(1).get<std::string>());
        rows.push_back({name, ++idx, score_matching(name, found, expected)});
    }
    return rows;
}

class App {
public:
    App() : app_("Schema matching by stochastic multi-agent simulation", "reflex-smas") {
        app_.require_subcommand(1);
        app_.set_help_all_flag("--help-all", "Show help for every subcommand");

        auto* fixtures = app_.add_subcommand("fixtures", "List the built-in benchmark scenarios");
        fixtures->callback([this] { cmd_fixtures(); });

        auto* run = app_.add_subcommand("run", "Execute a single seeded simulation");
        add_scenario_flags(run);
        add_sim_flags(run);
        add_meta_flags(run);
        run->add_option("--stream", cfg_.stream, "Stream id of the run")->capture_default_str();
        run->add_option("--out", cfg_.out, "Write the SimulationResult JSON here");
        run->add_option("--trace", cfg_.trace, "Write per-tick decision records (JSON lines) here");
        run->callback([this] { cmd_run(); });

        auto* meta = app_.add_subcommand("meta", "Execute meta-simulations and write a report");
        add_scenario_flags(meta);
        add_sim_flags(meta);
        add_meta_flags(meta);
        meta->add_option("--repetitions", cfg_.repetitions, "Number of meta-simulations")->capture_default_str();
        meta->add_option("--out", cfg_.out, "Write the report JSON here");
        meta->add_option("--out-csv", cfg_.out_csv, "Write the pair frequency table CSV here (one repetition only)");
        meta->callback([this] { cmd_meta(); });

        auto* eval = app_.add_subcommand("eval", "Score a meta report against its ground truth");
        eval->add_option("report", cfg_.report, "Report JSON written by `meta --out`")->required();
        eval->add_option("--out", cfg_.out, "Write the evaluation JSON here");
        eval->add_option("--out-csv", cfg_.out_csv, "Write the result table CSV here");
        eval->callback([this] { cmd_eval(); });

        auto* sweep = app_.add_subcommand("sweep", "Compare meta-simulation sizes");
        add_scenario_flags(sweep);
        add_sim_flags(sweep);
        add_meta_flags(sweep);
        sweep->add_option("--sims-values", cfg_.sims_values, "Simulation counts to compare")
            ->delimiter(',')
            ->capture_default_str();
        sweep->add_option("--repetitions", cfg_.sweep_repetitions, "Meta-simulations per simulation count")
            ->capture_default_str();
        sweep->add_option("--out-csv", cfg_.out_csv, "Write the sims,mean_pct CSV here");
        sweep->callback([this] { cmd_sweep(); });

        auto* repro = app_.add_subcommand("reproduce", "All fixtures x repeated meta-simulations, combined table");
        add_sim_flags(repro);
        add_meta_flags(repro);
        repro->add_option("--repetitions", cfg_.reproduce_repetitions, "Meta-simulations per fixture")
            ->capture_default_str();
        repro->add_option("--out-csv", cfg_.out_csv, "Write the combined table CSV here");
        repro->callback([this] { cmd_reproduce(); });
    }

    CLI::App& parser() { return app_; }

    int main(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
        out_ = &out;
        err_ = &err;
        try {
            cfg_.seed = seed_from_env();
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n";
            return kExitValidation;
        }
        std::reverse(args.begin(), args.end());
        try {
            app_.parse(std::move(args));
        } catch (const CLI::CallForHelp&) {
            out << app_.help();
            return kExitOk;
        } catch (const CLI::CallForAllHelp&) {
            out << app_.help("", CLI::AppFormatMode::All);
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << "\n\n" << usage_for_error();
            return kExitValidation;
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n";
            return kExitValidation;
        } catch (const IoError& e) {
            err << "error: " << e.what() << "\n";
            return kExitIo;
        } catch (const ParseError& e) {
            err << "error: " << e.what() << "\n";
            return kExitIo;
        } catch (const ValidationError& e) {
            err << "error: " << e.what() << "\n";
            return kExitIo;
        } catch (const nlohmann::json::exception& e) {
            err << "error: malformed report: " << e.what() << "\n";
            return kExitIo;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitValidation;
        }
        return kExitOk;
    }

private:
    std::string usage_for_error() {
        for (auto* sub : app_.get_subcommands()) return sub->help();
        return app_.help();
    }

    void add_scenario_flags(CLI::App* sub) {
        sub->add_option("--fixture", cfg_.fixture, "Built-in scenario: person, order or travel");
        sub->add_option("--scenario", cfg_.scenario_path, "Scenario JSON file");
    }

    void add_sim_flags(CLI::App* sub) {
        sub->add_option("--seed", cfg_.seed, "Root seed (overrides REFLEX_SM_SEED)");
        sub->add_option("--threshold-lo", cfg_.threshold_lo, "Lower bound of the random threshold")->capture_default_str();
        sub->add_option("--threshold-hi", cfg_.threshold_hi, "Upper bound of the random threshold")->capture_default_str();
        sub->add_option("--measures-per-tick", cfg_.measures_per_tick, "Measures drawn per perception")->capture_default_str();
        sub->add_option("--measures", cfg_.measures,
                        "Comma list restricting the measure pool "
                        "(levenshtein,jaro-winkler,bigram-dice,trigram-jaccard,monge-elkan)")
            ->delimiter(',');
        sub->add_option("--convergence-streak", cfg_.convergence_streak, "Ticks a candidate must persist")->capture_default_str();
        sub->add_option("--patience", cfg_.patience, "Ticks before a belief reset")->capture_default_str();
        sub->add_option("--max-ticks", cfg_.max_ticks, "Tick budget per simulation")->capture_default_str();
    }

    void add_meta_flags(CLI::App* sub) {
        sub->add_option("--sims", cfg_.sims, "Simulations per meta-simulation")->capture_default_str();
        sub->add_option("--cutoff", cfg_.cutoff, "Frequency a pair needs to be selected")->capture_default_str();
        sub->add_option("--workers", cfg_.workers, "Worker threads per meta-simulation")->capture_default_str();
    }

    void cmd_fixtures() {
        auto& out = *out_;
        for (const auto& s : builtin_fixtures()) {
            char h[16];
            std::snprintf(h, sizeof h, "%.3f", heterogeneity_index(s));
            out << s.name << "\tsource=" << s.source.size() << "\ttarget=" << s.target.size()
                << "\texpected=" << s.expected.pairs.size() << "\tband=" << band_name(s.band)
                << "\theterogeneity=" << h << "\n";
        }
    }

    void cmd_run() {
        const auto meta = meta_config(cfg_);
        const auto scenario = resolve_scenario(cfg_);
        std::ofstream trace_file;
        TraceSink sink;
        if (!cfg_.trace.empty()) {
            trace_file.open(cfg_.trace, std::ios::binary);
            if (!trace_file) throw IoError("cannot write '" + cfg_.trace + "'");
            sink = [&trace_file](const nlohmann::json& rec) { trace_file << rec.dump() << "\n"; };
        }
        const auto result = run_simulation(scenario, meta.base, RngStream(cfg_.seed, cfg_.stream), sink);
        auto& out = *out_;
        out << scenario.name << ": " << result.matched_pairs.size() << " pairs in " << result.ticks_used << " ticks\n";
        for (const auto& p : result.matched_pairs) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f", p.mean_score);
            out << "  " << p.source_id << " -> " << p.target_id << "  score=" << buf << "  tick=" << p.tick << "\n";
        }
        const auto eval = score_matching(scenario.name, to_pair_set(result), scenario.expected);
        out << "correct " << eval.correct_found << "/" << eval.matchings_to_find << " (" << format_pct(eval.pct_correct)
            << ")\n";
        if (!cfg_.out.empty()) write_file(cfg_.out, to_json(result).dump(2) + "\n");
    }

    void cmd_meta() {
        const auto meta = meta_config(cfg_);
        if (!cfg_.out_csv.empty() && cfg_.repetitions != 1)
            throw UsageError("--out-csv needs --repetitions 1 (one frequency table per file)");
        const auto scenario = resolve_scenario(cfg_);
        const auto rep = repeat_meta(scenario, meta, static_cast<std::size_t>(cfg_.repetitions), cfg_.workers);
        const auto doc = meta_document(scenario, meta, rep);
        *out_ << experiment_table_text(eval_document(doc));
        if (!cfg_.out.empty()) write_file(cfg_.out, doc.dump(2) + "\n");
        if (!cfg_.out_csv.empty()) write_file(cfg_.out_csv, frequency_csv(rep.reports.front()));
    }

    void cmd_eval() {
        const auto text = read_file(cfg_.report);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw IoError("malformed report '" + cfg_.report + "': " + e.what());
        }
        const auto rows = eval_document(doc);
        *out_ << experiment_table_text(rows);
        if (!cfg_.out.empty()) {
            auto arr = nlohmann::json::array();
            for (const auto& r : rows) {
                auto j = to_json(r.eval);
                j["meta_simulation"] = r.meta_index;
                arr.push_back(j);
            }
            write_file(cfg_.out, arr.dump(2) + "\n");
        }
        if (!cfg_.out_csv.empty()) write_file(cfg_.out_csv, experiment_table_csv(rows));
    }

    void cmd_sweep() {
        cfg_.repetitions = cfg_.sweep_repetitions;
        const auto meta = meta_config(cfg_);
        if (cfg_.sims_values.empty()) throw UsageError("--sims-values is empty");
        std::vector<std::size_t> values;
        for (long long v : cfg_.sims_values) {
            if (v < 1) throw UsageError("--sims-values entries must be >= 1");
            values.push_back(static_cast<std::size_t>(v));
        }
        const auto scenario = resolve_scenario(cfg_);
        const auto points =
            sweep_sims(scenario, meta, values, static_cast<std::size_t>(cfg_.repetitions), cfg_.workers);
        for (const auto& p : points) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f%%", p.mean_pct * 100.0);
            *out_ << scenario.name << "\tsims=" << p.sims << "\tmean % C.M.F.=" << buf << "\n";
        }
        if (!cfg_.out_csv.empty()) write_file(cfg_.out_csv, sweep_csv(points));
    }

    void cmd_reproduce() {
        cfg_.repetitions = cfg_.reproduce_repetitions;
        const auto meta = meta_config(cfg_);
        const auto rows = reproduce_table(meta, static_cast<std::size_t>(cfg_.repetitions), cfg_.workers);
        *out_ << experiment_table_text(rows) << "\n" << comparison_table_text(rows);
        if (!cfg_.out_csv.empty()) write_file(cfg_.out_csv, experiment_table_csv(rows));
    }

    static std::set<IdPair> to_pair_set(const SimulationResult& r) {
        std::set<IdPair> s;
        for (const auto& p : r.matched_pairs) s.emplace(p.source_id, p.target_id);
        return s;
    }

    CLI::App app_;
    CliConfig cfg_;
    std::ostream* out_ = &std::cout;
    std::ostream* err_ = &std::cerr;
};

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    App app;
    return app.main(std::move(args), out, err);
}

} // namespace reflex_smas::cli
