#pragma once

// Batches of seeded simulation runs and the frequency analysis that turns
// them into one final matching.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "reflex_smas/agent_engine.hpp"
#include "reflex_smas/schema.hpp"
#include "reflex_smas/stochastic.hpp"

namespace reflex_smas {

struct MetaConfig {
    std::size_t n_simulations = 10;
    double frequency_cutoff = 0.5;
    SimulationConfig base;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_simulations < 1) throw std::invalid_argument("n_simulations must be >= 1");
        if (!(frequency_cutoff > 0.0 && frequency_cutoff <= 1.0))
            throw std::invalid_argument("frequency cutoff must be in (0, 1]");
        base.validate();
    }
};

struct MetaReport {
    std::string scenario_name;
    std::size_t n_simulations = 0;
    std::uint64_t seed = 0;
    std::map<IdPair, std::size_t> per_pair_count;
    std::map<IdPair, double> per_pair_frequency;
    std::map<IdPair, double> per_pair_mean_score;
    std::set<IdPair> final_matching;
    std::vector<SimulationResult> runs; // in stream_id order

    friend bool operator==(const MetaReport&, const MetaReport&) = default;
};

/// Keeps pairs at or above `cutoff` and resolves 1:1 conflicts greedily in
/// the order (frequency desc, mean score desc, source id asc, target id asc).
inline std::set<IdPair> select_final(const std::map<IdPair, double>& freqs,
                                     const std::map<IdPair, double>& mean_scores, double cutoff) {
    struct Candidate {
        const IdPair* pair;
        double freq;
        double mean;
    };
    std::vector<Candidate> cands;
    for (const auto& [pair, f] : freqs) {
        if (f < cutoff) continue;
        const auto it = mean_scores.find(pair);
        cands.push_back({&pair, f, it == mean_scores.end() ? 0.0 : it->second});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(b.freq, b.mean, a.pair->first, a.pair->second) <
               std::tie(a.freq, a.mean, b.pair->first, b.pair->second);
    });
    std::set<std::string> used_src, used_tgt;
    std::set<IdPair> out;
    for (const auto& c : cands) {
        if (used_src.contains(c.pair->first) || used_tgt.contains(c.pair->second)) continue;
        used_src.insert(c.pair->first);
        used_tgt.insert(c.pair->second);
        out.insert(*c.pair);
    }
    return out;
}

/// Tallies pair occurrences over `runs` and selects the final matching.
inline MetaReport summarize_runs(std::string scenario_name, std::vector<SimulationResult> runs, double cutoff,
                                 std::uint64_t seed) {
    MetaReport report;
    report.scenario_name = std::move(scenario_name);
    report.n_simulations = runs.size();
    report.seed = seed;
    std::map<IdPair, double> score_sum;
    for (const auto& run : runs) {
        for (const auto& p : run.matched_pairs) {
            const IdPair key{p.source_id, p.target_id};
            ++report.per_pair_count[key];
            score_sum[key] += p.mean_score;
        }
    }
    const double n = static_cast<double>(runs.size());
    for (const auto& [key, count] : report.per_pair_count) {
        report.per_pair_frequency[key] = static_cast<double>(count) / n;
        report.per_pair_mean_score[key] = score_sum[key] / static_cast<double>(count);
    }
    report.final_matching = select_final(report.per_pair_frequency, report.per_pair_mean_score, cutoff);
    report.runs = std::move(runs);
    return report;
}

/// Runs simulations for stream ids 0..n-1 of `cfg.seed`, spread over
/// `workers` threads. Output does not depend on the worker count.
inline MetaReport run_meta(const Scenario& scenario, const MetaConfig& cfg, std::size_t workers = 1) {
    cfg.validate();
    std::vector<SimulationResult> runs(cfg.n_simulations);
    workers = std::clamp<std::size_t>(workers, 1, cfg.n_simulations);

    if (workers == 1) {
        for (std::size_t i = 0; i < cfg.n_simulations; ++i)
            runs[i] = run_simulation(scenario, cfg.base, RngStream(cfg.seed, i));
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mu;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < cfg.n_simulations; i = next++) {
                    try {
                        runs[i] = run_simulation(scenario, cfg.base, RngStream(cfg.seed, i));
                    } catch (...) {
                        std::lock_guard lock(failure_mu);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }
    return summarize_runs(scenario.name, std::move(runs), cfg.frequency_cutoff, cfg.seed);
}

inline std::uint64_t repetition_seed(std::uint64_t seed, std::size_t repetition) {
    return mix_keys({seed, 0x5245504541544544ULL, repetition});
}

struct RepeatedMeta {
    std::vector<MetaReport> reports;
    /// For each pair, how many repetitions selected it in their final matching.
    std::map<IdPair, std::size_t> selection_count;
};

inline RepeatedMeta repeat_meta(const Scenario& scenario, const MetaConfig& cfg, std::size_t repetitions,
                                std::size_t workers = 1) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    RepeatedMeta out;
    for (std::size_t r = 0; r < repetitions; ++r) {
        MetaConfig rc = cfg;
        rc.seed = repetition_seed(cfg.seed, r);
        out.reports.push_back(run_meta(scenario, rc, workers));
        for (const auto& pair : out.reports.back().final_matching) ++out.selection_count[pair];
    }
    return out;
}

inline nlohmann::json to_json(const MetaReport& r) {
    auto pairs = nlohmann::json::array();
    for (const auto& [key, freq] : r.per_pair_frequency) {
        pairs.push_back({{"source", key.first},
                         {"target", key.second},
                         {"count", r.per_pair_count.at(key)},
                         {"frequency", freq},
                         {"mean_score", r.per_pair_mean_score.at(key)},
                         {"selected", r.final_matching.contains(key)}});
    }
    auto final_matching = nlohmann::json::array();
    for (const auto& [s, t] : r.final_matching) final_matching.push_back({s, t});
    auto runs = nlohmann::json::array();
    for (const auto& run : r.runs) runs.push_back(to_json(run));
    return {{"scenario", r.scenario_name},
            {"n_simulations", r.n_simulations},
            {"seed", r.seed},
            {"pairs", pairs},
            {"final_matching", final_matching},
            {"runs", runs}};
}

/// Frequency table as CSV: source_id,target_id,frequency,mean_score,selected.
inline std::string frequency_csv(const MetaReport& r) {
    std::string out = "source_id,target_id,frequency,mean_score,selected\n";
    char buf[64];
    for (const auto& [key, freq] : r.per_pair_frequency) {
        out += key.first + "," + key.second + ",";
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", freq, r.per_pair_mean_score.at(key),
                      r.final_matching.contains(key) ? 1 : 0);
        out += buf;
    }
    return out;
}

} // namespace reflex_smas
