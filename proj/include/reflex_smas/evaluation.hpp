#pragma once

// Scoring found matchings against ground truth and rendering experiment
// tables (per-scenario rows, simulation-count sweeps).

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "reflex_smas/fixtures.hpp"
#include "reflex_smas/meta_simulation.hpp"
#include "reflex_smas/schema.hpp"

namespace reflex_smas {

struct EvalReport {
    std::string scenario_name;
    std::size_t matchings_to_find = 0;
    std::size_t correct_found = 0;
    double pct_correct = 0.0; // fraction in [0,1]; equals recall
    std::size_t spurious_found = 0;
    double precision = 1.0;
    double recall = 0.0;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

inline EvalReport score_matching(std::string scenario_name, const std::set<IdPair>& found,
                                 const GroundTruthMapping& expected) {
    EvalReport r;
    r.scenario_name = std::move(scenario_name);
    r.matchings_to_find = expected.pairs.size();
    for (const auto& p : found) {
        if (expected.contains(p))
            ++r.correct_found;
        else
            ++r.spurious_found;
    }
    // An empty ground truth is trivially fully recovered.
    r.recall = r.matchings_to_find == 0
                   ? 1.0
                   : static_cast<double>(r.correct_found) / static_cast<double>(r.matchings_to_find);
    r.pct_correct = r.recall;
    const std::size_t found_n = r.correct_found + r.spurious_found;
    r.precision = found_n == 0 ? 1.0 : static_cast<double>(r.correct_found) / static_cast<double>(found_n);
    return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
    return {{"scenario", r.scenario_name},     {"matchings_to_find", r.matchings_to_find},
            {"correct_found", r.correct_found}, {"pct_correct", r.pct_correct},
            {"spurious_found", r.spurious_found}, {"precision", r.precision},
            {"recall", r.recall}};
}

/// Whole-number percentage as printed in result tables ("83%").
inline std::string format_pct(double fraction) {
    return std::to_string(static_cast<long>(std::lround(fraction * 100.0))) + "%";
}

struct ExperimentRow {
    std::string scenario;
    std::size_t meta_index = 0; // 1-based
    EvalReport eval;
};

/// Published reference numbers for the COMA matcher on the three benchmark
/// scenarios, displayed next to our results. COMA itself is not run.
struct ReferenceResult {
    std::string_view scenario;
    std::size_t matchings_to_find;
    std::size_t correct_found;
};
inline constexpr ReferenceResult kComaReference[] = {
    {"Person", 6, 5},
    {"Order", 8, 6},
    {"Travel", 15, 13},
};

inline std::string experiment_table_text(const std::vector<ExperimentRow>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "Scenario" << std::right << std::setw(6) << "M.S." << std::setw(10)
        << "M. to F." << std::setw(8) << "C.M.F." << std::setw(10) << "% C.M.F." << std::setw(11)
        << "Precision" << "\n";
    for (const auto& r : rows) {
        char prec[16];
        std::snprintf(prec, sizeof prec, "%.3f", r.eval.precision);
        out << std::left << std::setw(10) << r.scenario << std::right << std::setw(6) << r.meta_index
            << std::setw(10) << r.eval.matchings_to_find << std::setw(8) << r.eval.correct_found << std::setw(10)
            << format_pct(r.eval.pct_correct) << std::setw(11) << prec << "\n";
    }
    return out.str();
}

inline std::string experiment_table_csv(const std::vector<ExperimentRow>& rows) {
    std::string out = "scenario,meta_simulation,matchings_to_find,correct_found,pct_correct,spurious_found,precision\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, ",%zu,%zu,%zu,%.17g,%zu,%.17g\n", r.meta_index, r.eval.matchings_to_find,
                      r.eval.correct_found, r.eval.pct_correct, r.eval.spurious_found, r.eval.precision);
        out += r.scenario + buf;
    }
    return out;
}

/// Inverse of experiment_table_csv.
inline std::vector<ExperimentRow> parse_experiment_csv(std::string_view text) {
    std::vector<ExperimentRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw ParseError("experiment CSV: missing header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 7) throw ParseError("experiment CSV: expected 7 columns in '" + line + "'");
        ExperimentRow r;
        try {
            r.scenario = cells[0];
            r.meta_index = std::stoul(cells[1]);
            r.eval.scenario_name = cells[0];
            r.eval.matchings_to_find = std::stoul(cells[2]);
            r.eval.correct_found = std::stoul(cells[3]);
            r.eval.pct_correct = r.eval.recall = std::stod(cells[4]);
            r.eval.spurious_found = std::stoul(cells[5]);
            r.eval.precision = std::stod(cells[6]);
        } catch (const std::logic_error&) {
            throw ParseError("experiment CSV: bad number in '" + line + "'");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::string comparison_table_text(const std::vector<ExperimentRow>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "Scenario" << std::right << std::setw(10) << "M. to F." << std::setw(12)
        << "Ours C.M.F." << std::setw(8) << "%" << std::setw(12) << "COMA C.M.F." << std::setw(8) << "%"
        << "\n";
    for (const auto& ref : kComaReference) {
        // Worst meta-simulation for the scenario, so the comparison is conservative.
        const ExperimentRow* worst = nullptr;
        for (const auto& r : rows)
            if (r.scenario == ref.scenario && (!worst || r.eval.correct_found < worst->eval.correct_found)) worst = &r;
        if (!worst) continue;
        out << std::left << std::setw(10) << ref.scenario << std::right << std::setw(10) << ref.matchings_to_find
            << std::setw(12) << worst->eval.correct_found << std::setw(8) << format_pct(worst->eval.pct_correct)
            << std::setw(12) << ref.correct_found
            << std::setw(8)
            << format_pct(static_cast<double>(ref.correct_found) / static_cast<double>(ref.matchings_to_find))
            << "\n";
    }
    return out.str();
}

struct SweepPoint {
    std::size_t sims = 0;
    double mean_pct = 0.0; // fraction in [0,1]
    std::vector<double> per_repetition;
};

/// Mean recall of repeated meta-simulations for each simulation count.
inline std::vector<SweepPoint> sweep_sims(const Scenario& scenario, const MetaConfig& cfg,
                                          const std::vector<std::size_t>& sims_values, std::size_t repetitions,
                                          std::size_t workers = 1) {
    if (sims_values.empty()) throw std::invalid_argument("sims_values is empty");
    std::vector<SweepPoint> out;
    for (std::size_t n : sims_values) {
        MetaConfig c = cfg;
        c.n_simulations = n;
        const auto rep = repeat_meta(scenario, c, repetitions, workers);
        SweepPoint pt{n, 0.0, {}};
        for (const auto& report : rep.reports)
            pt.per_repetition.push_back(score_matching(scenario.name, report.final_matching, scenario.expected).pct_correct);
        pt.mean_pct = std::accumulate(pt.per_repetition.begin(), pt.per_repetition.end(), 0.0) /
                      static_cast<double>(pt.per_repetition.size());
        out.push_back(std::move(pt));
    }
    return out;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::string out = "sims,mean_pct\n";
    char buf[64];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", p.sims, p.mean_pct * 100.0);
        out += buf;
    }
    return out;
}

/// Every built-in fixture x `repetitions` meta-simulations, scored.
inline std::vector<ExperimentRow> reproduce_table(const MetaConfig& cfg, std::size_t repetitions,
                                                  std::size_t workers = 1) {
    std::vector<ExperimentRow> rows;
    for (const auto& scenario : builtin_fixtures()) {
        const auto rep = repeat_meta(scenario, cfg, repetitions, workers);
        for (std::size_t i = 0; i < rep.reports.size(); ++i)
            rows.push_back({scenario.name, i + 1,
                            score_matching(scenario.name, rep.reports[i].final_matching, scenario.expected)});
    }
    return rows;
}

} // namespace reflex_smas
