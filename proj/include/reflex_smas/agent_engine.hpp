#pragma once

// Reflexive schema-element agents and the synchronous tick scheduler for a
// single simulation run.
//
// A tick is four synchronous rounds over every agent that is not yet
// matched: all agents perceive, then all decide, then all act, and finally
// mutual confirmations on the shared board are turned into matches. Every
// random draw an agent makes in a tick comes from a sub-stream keyed by
// (side, element index, tick), so the iteration order inside a round does
// not influence the outcome.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "reflex_smas/schema.hpp"
#include "reflex_smas/similarity.hpp"
#include "reflex_smas/stochastic.hpp"

namespace reflex_smas {

struct SimulationConfig {
    ThresholdInterval threshold_interval{0.45, 0.65};
    std::size_t measures_per_tick = 3;
    std::size_t convergence_streak = 3;
    std::size_t patience = 10;
    std::size_t max_ticks = 500;
    std::vector<MeasureId> measure_pool{kAllMeasures.begin(), kAllMeasures.end()};

    void validate() const {
        if (measure_pool.empty()) throw std::invalid_argument("measure pool is empty");
        std::set<MeasureId> uniq(measure_pool.begin(), measure_pool.end());
        if (uniq.size() != measure_pool.size()) throw std::invalid_argument("measure pool has duplicates");
        if (measures_per_tick < 1 || measures_per_tick > measure_pool.size())
            throw InvalidDrawSize("measures per tick must be in [1, " + std::to_string(measure_pool.size()) + "]");
        if (convergence_streak < 1) throw std::invalid_argument("convergence streak must be >= 1");
        if (patience < convergence_streak) throw std::invalid_argument("patience must be >= convergence streak");
        if (max_ticks < 1) throw std::invalid_argument("max ticks must be >= 1");
        ThresholdInterval check(threshold_interval.lo, threshold_interval.hi);
        (void)check;
    }
};

enum class Phase { Perceiving, Deciding, Acting };
enum class AgentStatus { Searching, Committed, Matched };

inline std::uint64_t side_key(Side s) { return s == Side::Source ? 1 : 2; }
inline Side opposite(Side s) { return s == Side::Source ? Side::Target : Side::Source; }

/// Runtime beliefs of one schema element. Opposite elements are referred to
/// by their index in the opposite schema.
struct AgentState {
    SchemaElement element;
    std::size_t index = 0;
    Phase phase = Phase::Perceiving;
    std::optional<std::size_t> candidate;
    std::size_t candidate_streak = 0;
    std::size_t patience_left = 0;
    AgentStatus status = AgentStatus::Searching;
    std::set<std::size_t> inbound_nominations;
};

struct Percept {
    std::size_t opposite = 0;
    double score = 0.0;
};

/// One perception: the measures and aggregation drawn for it and the
/// aggregated score per available opposite, ordered by opposite index.
struct PerceptTable {
    std::vector<MeasureId> measures;
    AggregationFn aggregation;
    std::vector<Percept> entries;
};

enum class DecisionKind { SelectCandidate, KeepCandidate, ResetBeliefs, ConfirmConsensus, NoOp };

inline std::string_view decision_name(DecisionKind k) {
    switch (k) {
    case DecisionKind::SelectCandidate: return "select";
    case DecisionKind::KeepCandidate: return "keep";
    case DecisionKind::ResetBeliefs: return "reset";
    case DecisionKind::ConfirmConsensus: return "confirm";
    case DecisionKind::NoOp: return "noop";
    }
    return "unknown";
}

struct Decision {
    DecisionKind kind = DecisionKind::NoOp;
    std::optional<std::size_t> target; // for Select / Confirm
    double threshold = 0.0;
    double best_score = 0.0;

    friend bool operator==(const Decision&, const Decision&) = default;
};

/// Per-measure similarity matrices for one scenario, in both directions
/// (Monge-Elkan is asymmetric). Scores never change during a run, so they
/// are computed once and shared read-only.
class SimilarityTable {
public:
    SimilarityTable(const Schema& source, const Schema& target)
        : n_source_(source.size()), n_target_(target.size()) {
        std::vector<TokenizedName> src, tgt;
        for (const auto& e : source.elements) src.push_back(normalize(e.name));
        for (const auto& e : target.elements) tgt.push_back(normalize(e.name));
        const std::size_t cells = n_source_ * n_target_;
        from_source_.assign(kAllMeasures.size() * cells, 0.0);
        from_target_.assign(kAllMeasures.size() * cells, 0.0);
        for (MeasureId m : kAllMeasures) {
            for (std::size_t s = 0; s < n_source_; ++s) {
                for (std::size_t t = 0; t < n_target_; ++t) {
                    from_source_[slot(m, s, t)] = score(m, src[s], tgt[t]);
                    from_target_[slot(m, s, t)] = score(m, tgt[t], src[s]);
                }
            }
        }
    }

    /// Score of `m` as perceived by agent `own` on `side` looking at `other`.
    double perceived(MeasureId m, Side side, std::size_t own, std::size_t other) const {
        return side == Side::Source ? from_source_[slot(m, own, other)]
                                    : from_target_[slot(m, other, own)];
    }

    std::size_t size(Side side) const { return side == Side::Source ? n_source_ : n_target_; }

private:
    std::size_t slot(MeasureId m, std::size_t s, std::size_t t) const {
        return (static_cast<std::size_t>(m) * n_source_ + s) * n_target_ + t;
    }

    std::size_t n_source_;
    std::size_t n_target_;
    std::vector<double> from_source_;
    std::vector<double> from_target_;
};

/// Shared environment of a run: current nominations, confirmations and the
/// matched relation. Index vectors are per side.
class MatchBoard {
public:
    MatchBoard(std::size_t n_source, std::size_t n_target)
        : nomination_{std::vector<std::optional<std::size_t>>(n_source),
                      std::vector<std::optional<std::size_t>>(n_target)},
          confirmation_{std::vector<std::optional<std::size_t>>(n_source),
                        std::vector<std::optional<std::size_t>>(n_target)},
          partner_{std::vector<std::optional<std::size_t>>(n_source),
                   std::vector<std::optional<std::size_t>>(n_target)} {}

    std::size_t size(Side side) const { return nomination_[at(side)].size(); }

    void nominate(Side side, std::size_t agent, std::optional<std::size_t> target) {
        nomination_[at(side)][agent] = target;
    }
    std::optional<std::size_t> nomination(Side side, std::size_t agent) const {
        return nomination_[at(side)][agent];
    }

    void confirm(Side side, std::size_t agent, std::size_t target) {
        confirmation_[at(side)][agent] = target;
    }
    std::optional<std::size_t> confirmation(Side side, std::size_t agent) const {
        return confirmation_[at(side)][agent];
    }
    void clear_confirmations() {
        for (auto& side : confirmation_) std::fill(side.begin(), side.end(), std::nullopt);
    }

    bool is_matched(Side side, std::size_t agent) const { return partner_[at(side)][agent].has_value(); }
    std::optional<std::size_t> partner(Side side, std::size_t agent) const { return partner_[at(side)][agent]; }

    void mark_matched(std::size_t source, std::size_t target) {
        if (partner_[0][source] || partner_[1][target])
            throw std::logic_error("agent matched twice");
        partner_[0][source] = target;
        partner_[1][target] = source;
        nomination_[0][source] = target;
        nomination_[1][target] = source;
    }

    /// Opposite agents on `side` currently nominating `agent`.
    std::set<std::size_t> nominators_of(Side side, std::size_t agent) const {
        std::set<std::size_t> out;
        const Side other = opposite(side);
        for (std::size_t j = 0; j < size(other); ++j) {
            if (!is_matched(other, j) && nomination(other, j) == agent) out.insert(j);
        }
        return out;
    }

    std::size_t available(Side side) const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < size(side); ++i) n += is_matched(side, i) ? 0 : 1;
        return n;
    }

private:
    static std::size_t at(Side side) { return side == Side::Source ? 0 : 1; }

    std::vector<std::optional<std::size_t>> nomination_[2];
    std::vector<std::optional<std::size_t>> confirmation_[2];
    std::vector<std::optional<std::size_t>> partner_[2];
};

/// Draws this tick's measure subset and aggregation, scores every unmatched
/// opposite agent, and refreshes the agent's inbound nominations.
inline PerceptTable perceive(AgentState& agent, Side side, const SimilarityTable& sims, const MatchBoard& board,
                             RngStream& rng, const SimulationConfig& cfg) {
    agent.phase = Phase::Perceiving;
    PerceptTable table;
    table.measures = draw_measures(rng, cfg.measure_pool, cfg.measures_per_tick);
    table.aggregation = draw_aggregation(rng, table.measures.size());
    agent.inbound_nominations = board.nominators_of(side, agent.index);

    const Side other = opposite(side);
    std::vector<double> scores(table.measures.size());
    for (std::size_t j = 0; j < sims.size(other); ++j) {
        if (board.is_matched(other, j)) continue;
        for (std::size_t k = 0; k < table.measures.size(); ++k)
            scores[k] = sims.perceived(table.measures[k], side, agent.index, j);
        table.entries.push_back({j, aggregate(table.aggregation, scores)});
    }
    return table;
}

/// Picks the action for this tick. `opposite_ids` resolves argmax ties in
/// favour of the lexicographically lowest opposite id.
inline Decision decide(AgentState& agent, const PerceptTable& percepts, std::span<const SchemaElement> opposite_ids,
                       RngStream& rng, const SimulationConfig& cfg) {
    agent.phase = Phase::Deciding;
    Decision d;
    d.threshold = draw_threshold(rng, cfg.threshold_interval);

    const Percept* best = nullptr;
    for (const auto& p : percepts.entries) {
        if (!best || p.score > best->score ||
            (p.score == best->score && opposite_ids[p.opposite].id < opposite_ids[best->opposite].id))
            best = &p;
    }
    if (best) d.best_score = best->score;

    if (agent.candidate && agent.candidate_streak >= cfg.convergence_streak &&
        agent.inbound_nominations.contains(*agent.candidate)) {
        d.kind = DecisionKind::ConfirmConsensus;
        d.target = agent.candidate;
        return d;
    }
    if (agent.patience_left == 0) {
        d.kind = DecisionKind::ResetBeliefs;
        return d;
    }
    if (!best || best->score < d.threshold) {
        d.kind = DecisionKind::NoOp;
        return d;
    }
    if (agent.candidate == best->opposite) {
        d.kind = DecisionKind::KeepCandidate;
        d.target = agent.candidate;
    } else {
        d.kind = DecisionKind::SelectCandidate;
        d.target = best->opposite;
    }
    return d;
}

/// Applies a decision to the agent and publishes its effect on the board.
/// A confirmation only becomes a match in detect_consensus.
inline void act(AgentState& agent, Side side, const Decision& decision, MatchBoard& board,
                const SimulationConfig& cfg) {
    agent.phase = Phase::Acting;
    auto tick_down = [&] {
        if (agent.patience_left > 0) --agent.patience_left;
    };
    switch (decision.kind) {
    case DecisionKind::SelectCandidate:
        agent.candidate = decision.target;
        agent.candidate_streak = 1;
        agent.patience_left = cfg.patience;
        agent.status = AgentStatus::Searching;
        board.nominate(side, agent.index, agent.candidate);
        break;
    case DecisionKind::KeepCandidate:
        ++agent.candidate_streak;
        tick_down();
        agent.status = AgentStatus::Searching;
        board.nominate(side, agent.index, agent.candidate);
        break;
    case DecisionKind::ResetBeliefs:
        agent.candidate.reset();
        agent.candidate_streak = 0;
        agent.patience_left = cfg.patience;
        agent.status = AgentStatus::Searching;
        board.nominate(side, agent.index, std::nullopt);
        break;
    case DecisionKind::ConfirmConsensus:
        tick_down();
        agent.status = AgentStatus::Committed;
        board.confirm(side, agent.index, *decision.target);
        break;
    case DecisionKind::NoOp:
        tick_down();
        if (agent.status == AgentStatus::Committed) agent.status = AgentStatus::Searching;
        break;
    }
}

/// Pairs (source index, target index) that confirmed each other this tick.
inline std::vector<std::pair<std::size_t, std::size_t>> detect_consensus(const MatchBoard& board) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t s = 0; s < board.size(Side::Source); ++s) {
        if (board.is_matched(Side::Source, s)) continue;
        const auto t = board.confirmation(Side::Source, s);
        if (!t || board.is_matched(Side::Target, *t)) continue;
        if (board.confirmation(Side::Target, *t) == s) out.emplace_back(s, *t);
    }
    return out;
}

struct MatchedPair {
    std::string source_id;
    std::string target_id;
    double mean_score = 0.0;
    std::size_t tick = 0;

    friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct SimulationResult {
    std::vector<MatchedPair> matched_pairs; // ordered by source id
    std::vector<std::string> unmatched_source;
    std::vector<std::string> unmatched_target;
    std::size_t ticks_used = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    friend bool operator==(const SimulationResult&, const SimulationResult&) = default;
};

inline nlohmann::json to_json(const SimulationResult& r) {
    auto pairs = nlohmann::json::array();
    for (const auto& p : r.matched_pairs)
        pairs.push_back({{"source", p.source_id}, {"target", p.target_id}, {"mean_score", p.mean_score},
                         {"tick", p.tick}});
    return {{"seed", r.seed},
            {"stream_id", r.stream_id},
            {"ticks_used", r.ticks_used},
            {"matched", pairs},
            {"unmatched_source", r.unmatched_source},
            {"unmatched_target", r.unmatched_target}};
}

/// Receives one JSON record per agent decision and per consensus event.
using TraceSink = std::function<void(const nlohmann::json&)>;

class Simulation {
public:
    Simulation(const Scenario& scenario, SimulationConfig cfg, const RngStream& rng)
        : scenario_(scenario), cfg_(std::move(cfg)), rng_(rng), sims_(scenario.source, scenario.target),
          board_(scenario.source.size(), scenario.target.size()),
          score_sum_(scenario.source.size() * scenario.target.size(), 0.0),
          score_count_(scenario.source.size() * scenario.target.size(), 0) {
        cfg_.validate();
        init_agents(agents_[0], scenario.source);
        init_agents(agents_[1], scenario.target);
    }

    void set_trace(TraceSink sink) { trace_ = std::move(sink); }

    std::size_t tick() const { return tick_; }
    const MatchBoard& board() const { return board_; }
    const std::vector<AgentState>& agents(Side side) const { return agents_[at(side)]; }
    const SimulationConfig& config() const { return cfg_; }

    /// No further tick can change the outcome: one side is exhausted or the
    /// tick budget is spent.
    bool finished() const {
        return tick_ >= cfg_.max_ticks || board_.available(Side::Source) == 0 ||
               board_.available(Side::Target) == 0;
    }

    /// Runs one tick with agents visited in index order.
    std::vector<std::pair<std::size_t, std::size_t>> step() {
        std::vector<std::size_t> src(agents_[0].size()), tgt(agents_[1].size());
        std::iota(src.begin(), src.end(), std::size_t{0});
        std::iota(tgt.begin(), tgt.end(), std::size_t{0});
        return step(src, tgt);
    }

    /// Runs one tick visiting agents in the given orders (permutations of
    /// each side's indices). Returns the pairs matched in this tick.
    std::vector<std::pair<std::size_t, std::size_t>> step(std::span<const std::size_t> source_order,
                                                          std::span<const std::size_t> target_order) {
        ++tick_;
        struct Slot {
            Side side;
            std::size_t index;
            RngStream rng;
            PerceptTable percepts;
            Decision decision;
        };
        std::vector<Slot> slots;
        auto enlist = [&](Side side, std::span<const std::size_t> order) {
            for (std::size_t i : order) {
                if (board_.is_matched(side, i)) continue;
                slots.push_back({side, i, rng_.fork({side_key(side), i, tick_}), {}, {}});
            }
        };
        enlist(Side::Source, source_order);
        enlist(Side::Target, target_order);

        for (auto& s : slots) {
            auto& agent = agents_[at(s.side)][s.index];
            s.percepts = perceive(agent, s.side, sims_, board_, s.rng, cfg_);
            for (const auto& p : s.percepts.entries) {
                const std::size_t cell = s.side == Side::Source ? s.index * n_target() + p.opposite
                                                                : p.opposite * n_target() + s.index;
                score_sum_[cell] += p.score;
                ++score_count_[cell];
            }
        }
        for (auto& s : slots) {
            const auto& others = s.side == Side::Source ? scenario_.target.elements : scenario_.source.elements;
            s.decision = decide(agents_[at(s.side)][s.index], s.percepts, others, s.rng, cfg_);
        }
        for (auto& s : slots) {
            act(agents_[at(s.side)][s.index], s.side, s.decision, board_, cfg_);
            if (trace_) trace_decision(s.side, s.index, s.decision);
        }

        auto matched = detect_consensus(board_);
        for (const auto& [src, tgt] : matched) {
            board_.mark_matched(src, tgt);
            auto& a = agents_[0][src];
            auto& b = agents_[1][tgt];
            a.status = b.status = AgentStatus::Matched;
            a.candidate = tgt;
            b.candidate = src;
            matches_.push_back({src, tgt, tick_});
            if (trace_)
                trace_({{"tick", tick_},
                        {"event", "match"},
                        {"source", scenario_.source.elements[src].id},
                        {"target", scenario_.target.elements[tgt].id}});
        }
        board_.clear_confirmations();
        drop_stale_candidates();
        return matched;
    }

    SimulationResult run() {
        while (!finished()) step();
        return result();
    }

    SimulationResult result() const {
        SimulationResult r;
        r.ticks_used = tick_;
        r.seed = rng_.seed();
        r.stream_id = rng_.stream_id();
        for (const auto& m : matches_) {
            const std::size_t cell = m.source * n_target() + m.target;
            const double mean = score_count_[cell] ? score_sum_[cell] / static_cast<double>(score_count_[cell]) : 0.0;
            r.matched_pairs.push_back(
                {scenario_.source.elements[m.source].id, scenario_.target.elements[m.target].id, mean, m.tick});
        }
        std::sort(r.matched_pairs.begin(), r.matched_pairs.end(),
                  [](const MatchedPair& x, const MatchedPair& y) { return x.source_id < y.source_id; });
        for (std::size_t i = 0; i < scenario_.source.size(); ++i)
            if (!board_.is_matched(Side::Source, i)) r.unmatched_source.push_back(scenario_.source.elements[i].id);
        for (std::size_t i = 0; i < scenario_.target.size(); ++i)
            if (!board_.is_matched(Side::Target, i)) r.unmatched_target.push_back(scenario_.target.elements[i].id);
        std::sort(r.unmatched_source.begin(), r.unmatched_source.end());
        std::sort(r.unmatched_target.begin(), r.unmatched_target.end());
        return r;
    }

private:
    struct Match {
        std::size_t source;
        std::size_t target;
        std::size_t tick;
    };

    static std::size_t at(Side side) { return side == Side::Source ? 0 : 1; }
    std::size_t n_target() const { return scenario_.target.size(); }

    void init_agents(std::vector<AgentState>& out, const Schema& schema) {
        for (std::size_t i = 0; i < schema.size(); ++i) {
            AgentState a;
            a.element = schema.elements[i];
            a.index = i;
            a.patience_left = cfg_.patience;
            out.push_back(std::move(a));
        }
    }

    // A candidate that has just been matched elsewhere is no longer a belief
    // worth holding.
    void drop_stale_candidates() {
        for (Side side : {Side::Source, Side::Target}) {
            for (auto& a : agents_[at(side)]) {
                if (a.status == AgentStatus::Matched || !a.candidate) continue;
                if (!board_.is_matched(opposite(side), *a.candidate)) continue;
                a.candidate.reset();
                a.candidate_streak = 0;
                a.patience_left = cfg_.patience;
                a.status = AgentStatus::Searching;
                board_.nominate(side, a.index, std::nullopt);
            }
        }
    }

    void trace_decision(Side side, std::size_t index, const Decision& d) const {
        const auto& own = side == Side::Source ? scenario_.source : scenario_.target;
        const auto& other = side == Side::Source ? scenario_.target : scenario_.source;
        nlohmann::json rec{{"tick", tick_},
                           {"side", side == Side::Source ? "source" : "target"},
                           {"agent", own.elements[index].id},
                           {"decision", decision_name(d.kind)},
                           {"threshold", d.threshold},
                           {"best_score", d.best_score}};
        rec["target"] = d.target ? nlohmann::json(other.elements[*d.target].id) : nlohmann::json(nullptr);
        trace_(rec);
    }

    const Scenario& scenario_;
    SimulationConfig cfg_;
    RngStream rng_;
    SimilarityTable sims_;
    MatchBoard board_;
    std::vector<AgentState> agents_[2];
    std::vector<double> score_sum_;
    std::vector<std::size_t> score_count_;
    std::vector<Match> matches_;
    std::size_t tick_ = 0;
    TraceSink trace_;
};

/// One seeded run to completion. Fully determined by its arguments.
inline SimulationResult run_simulation(const Scenario& scenario, const SimulationConfig& cfg, const RngStream& rng,
                                       TraceSink trace = {}) {
    Simulation sim(scenario, cfg, rng);
    if (trace) sim.set_trace(std::move(trace));
    return sim.run();
}

} // namespace reflex_smas
