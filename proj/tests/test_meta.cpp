#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "reflex_smas/evaluation.hpp"
#include "reflex_smas/meta_simulation.hpp"

using namespace reflex_smas;

namespace {

void check_report_invariants(const MetaReport& r, double cutoff) {
    const auto rc = oracle::recount(r);
    ASSERT_EQ(rc.count, r.per_pair_count);
    ASSERT_EQ(rc.frequency, r.per_pair_frequency);
    std::map<std::string, double> mass;
    for (const auto& [k, f] : r.per_pair_frequency) {
        const double scaled = f * static_cast<double>(r.n_simulations);
        ASSERT_EQ(scaled, std::round(scaled));
        mass[k.first] += f;
    }
    for (const auto& [src, m] : mass) ASSERT_LE(m, 1.0 + 1e-12) << src;
    std::set<std::string> s, t;
    for (const auto& p : r.final_matching) {
        ASSERT_TRUE(s.insert(p.first).second);
        ASSERT_TRUE(t.insert(p.second).second);
        ASSERT_GE(r.per_pair_frequency.at(p), cutoff);
    }
}

} // namespace

TEST(SelectFinal, Examples) {
    const IdPair ax{"a", "x"}, ay{"a", "y"}, bx{"b", "x"};
    EXPECT_EQ(select_final({{ax, 0.8}}, {{ax, 0.9}}, 0.5), std::set<IdPair>{ax});
    EXPECT_EQ(select_final({{ax, 0.6}, {ay, 0.4}}, {}, 0.5), std::set<IdPair>{ax});
    EXPECT_EQ(select_final({{ax, 0.6}, {bx, 0.6}}, {{ax, 0.9}, {bx, 0.7}}, 0.5), std::set<IdPair>{ax});
    EXPECT_EQ(select_final({{ax, 0.6}, {bx, 0.6}}, {{ax, 0.7}, {bx, 0.9}}, 0.5), std::set<IdPair>{bx});
    EXPECT_EQ(select_final({{ax, 0.6}, {bx, 0.6}}, {{ax, 0.8}, {bx, 0.8}}, 0.5), std::set<IdPair>{ax});
}

TEST(SelectFinalProperty, AntitoneInCutoffAndInjective) {
    std::mt19937_64 gen(1);
    for (int c = 0; c < 1000; ++c) {
        std::map<IdPair, double> freqs, means;
        const int n = 10;
        for (int i = 0; i < 12; ++i) {
            const IdPair p{"s" + std::to_string(gen() % 4), "t" + std::to_string(gen() % 4)};
            freqs[p] = static_cast<double>(1 + gen() % n) / n;
            means[p] = static_cast<double>(gen() % 1000) / 1000.0;
        }
        const double lo = static_cast<double>(1 + gen() % n) / n;
        const double hi = std::min(1.0, lo + static_cast<double>(gen() % n) / n);
        const auto a = select_final(freqs, means, lo);
        const auto b = select_final(freqs, means, hi);
        ASSERT_TRUE(std::includes(a.begin(), a.end(), b.begin(), b.end())) << "case " << c;
        std::set<std::string> s, t;
        for (const auto& p : a) {
            ASSERT_TRUE(s.insert(p.first).second);
            ASSERT_TRUE(t.insert(p.second).second);
            ASSERT_GE(freqs.at(p), lo);
        }
    }
}

TEST(Meta, IdentityScenarioAllPairsAlways) {
    const auto s = oracle::identity_scenario({"orderId", "shipDate", "amount", "zip"});
    MetaConfig cfg;
    cfg.seed = 3;
    const auto r = run_meta(s, cfg);
    for (const auto& p : s.expected.pairs) EXPECT_EQ(r.per_pair_frequency.at(p), 1.0);
    EXPECT_EQ(r.final_matching, s.expected.pairs);
}

TEST(Meta, SingleRun) {
    MetaConfig cfg;
    cfg.n_simulations = 1;
    cfg.seed = 5;
    const auto order = *find_fixture("order");
    const auto r = run_meta(order, cfg);
    std::set<IdPair> pairs;
    for (const auto& p : r.runs.front().matched_pairs) pairs.emplace(p.source_id, p.target_id);
    for (const auto& [k, f] : r.per_pair_frequency) EXPECT_EQ(f, 1.0);
    EXPECT_EQ(r.final_matching, pairs);
}

TEST(Meta, PersonTenRunsFindsEverything) {
    MetaConfig cfg;
    cfg.seed = 42;
    const auto person = *find_fixture("person");
    EXPECT_EQ(run_meta(person, cfg).final_matching, person.expected.pairs);
}

TEST(Meta, WorkerCountDoesNotChangeReport) {
    MetaConfig cfg;
    cfg.seed = 11;
    cfg.n_simulations = 12;
    const auto order = *find_fixture("order");
    const auto one = run_meta(order, cfg, 1);
    EXPECT_EQ(to_json(one).dump(), to_json(run_meta(order, cfg, 4)).dump());
    EXPECT_EQ(to_json(one).dump(), to_json(run_meta(order, cfg, 1)).dump());
    EXPECT_EQ(one, run_meta(order, cfg, 64));
}

TEST(Meta, ConfigValidation) {
    MetaConfig cfg;
    cfg.n_simulations = 0;
    EXPECT_THROW(run_meta(*find_fixture("person"), cfg), std::invalid_argument);
    cfg = {};
    cfg.frequency_cutoff = 0.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg.frequency_cutoff = 1.5;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(MetaProperty, BookkeepingMatchesRecount) {
    std::mt19937_64 gen(31);
    for (int c = 0; c < 1000; ++c) {
        const auto s = oracle::random_scenario(gen, 4);
        MetaConfig cfg;
        cfg.n_simulations = 1 + gen() % 6;
        cfg.frequency_cutoff = static_cast<double>(1 + gen() % 10) / 10.0;
        cfg.base.max_ticks = 1 + gen() % 60;
        cfg.seed = gen();
        const auto r = run_meta(s, cfg);
        check_report_invariants(r, cfg.frequency_cutoff);
        if (HasFatalFailure()) return;
    }
}

TEST(MetaProperty, FixtureReportsHoldInvariants) {
    for (const auto& f : builtin_fixtures()) {
        MetaConfig cfg;
        cfg.seed = 9;
        for (std::size_t n : {3u, 10u}) {
            cfg.n_simulations = n;
            check_report_invariants(run_meta(f, cfg), cfg.frequency_cutoff);
        }
    }
}

TEST(Repeat, SingleRepetition) {
    MetaConfig cfg;
    cfg.seed = 2;
    const auto person = *find_fixture("person");
    const auto rep = repeat_meta(person, cfg, 1);
    ASSERT_EQ(rep.reports.size(), 1u);
    for (const auto& p : rep.reports.front().final_matching) EXPECT_EQ(rep.selection_count.at(p), 1u);
    EXPECT_EQ(rep.selection_count.size(), rep.reports.front().final_matching.size());
    EXPECT_THROW(repeat_meta(person, cfg, 0), std::invalid_argument);
}

TEST(Repeat, PersonThreeRepetitions) {
    MetaConfig cfg;
    cfg.seed = 42;
    const auto person = *find_fixture("person");
    const auto rep = repeat_meta(person, cfg, 3);
    for (const auto& r : rep.reports) EXPECT_EQ(r.final_matching, person.expected.pairs);
    for (const auto& p : person.expected.pairs) EXPECT_EQ(rep.selection_count.at(p), 3u);
}

TEST(Repeat, RepetitionsUseDistinctSeeds) {
    MetaConfig cfg;
    cfg.seed = 42;
    const auto rep = repeat_meta(*find_fixture("order"), cfg, 3);
    EXPECT_NE(rep.reports[0].seed, rep.reports[1].seed);
    EXPECT_EQ(rep.reports[2].seed, repetition_seed(42, 2));
}

TEST(Repeat, OrderFewerSimulationsNoBetter) {
    MetaConfig cfg;
    cfg.seed = 42;
    const auto order = *find_fixture("order");
    const auto pts = sweep_sims(order, cfg, {3, 10}, 3);
    EXPECT_LE(pts[0].mean_pct, pts[1].mean_pct);
}

TEST(FrequencyCsv, Layout) {
    MetaConfig cfg;
    cfg.seed = 1;
    const auto r = run_meta(*find_fixture("person"), cfg);
    const auto csv = frequency_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "source_id,target_id,frequency,mean_score,selected");
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.per_pair_frequency.size() + 1);
    EXPECT_NE(csv.find("\np1,c1,"), std::string::npos) << csv;
}
