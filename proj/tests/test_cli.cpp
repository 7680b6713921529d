#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "cli_app.hpp"

namespace fs = std::filesystem;
using reflex_smas::cli::App;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = reflex_smas::cli::run(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("reflex-smas-test-" + std::to_string(::getpid()) + "-" +
                                             std::to_string(counter()++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    fs::path path_;
};

std::set<std::string> listing(const fs::path& dir) {
    std::set<std::string> names;
    for (const auto& e : fs::recursive_directory_iterator(dir)) names.insert(fs::relative(e.path(), dir).string());
    return names;
}

/// Runs the installed binary with `cwd` as working directory.
int run_binary(const fs::path& cwd, const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd '" + cwd.string() + "' && " + env + " '" + REFLEX_SMAS_CLI_PATH + "' " + args +
                            " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Cli, FixturesListing) {
    const auto r = cli({"fixtures"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("Person\tsource=6\ttarget=6\texpected=6\tband=medium"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("Order\tsource=8\ttarget=8\texpected=8\tband=high"), std::string::npos);
    EXPECT_NE(r.out.find("Travel\tsource=15\ttarget=15\texpected=15\tband=low"), std::string::npos);
}

TEST(Cli, MetaThenEvalPrintsPersonRow) {
    TempDir dir;
    const auto meta = cli({"meta", "--fixture", "person", "--sims", "10", "--seed", "7", "--out", dir / "r.json"});
    ASSERT_EQ(meta.code, 0) << meta.err;
    const auto eval = cli({"eval", dir / "r.json", "--out-csv", dir / "t.csv", "--out", dir / "e.json"});
    ASSERT_EQ(eval.code, 0) << eval.err;
    EXPECT_TRUE(std::regex_search(eval.out, std::regex(R"(Person\s+1\s+6\s+6\s+100%)"))) << eval.out;
    EXPECT_EQ(slurp(dir.path() / "t.csv"),
              "scenario,meta_simulation,matchings_to_find,correct_found,pct_correct,spurious_found,precision\n"
              "Person,1,6,6,1,0,1\n");
    const auto e = nlohmann::json::parse(slurp(dir.path() / "e.json"));
    EXPECT_EQ(e.at(0).at("correct_found"), 6);
}

TEST(Cli, MetaIsByteIdenticalAcrossInvocationsAndWorkers) {
    TempDir dir;
    ASSERT_EQ(cli({"meta", "--fixture", "person", "--sims", "10", "--seed", "7", "--out", dir / "a.json"}).code, 0);
    ASSERT_EQ(cli({"meta", "--fixture", "person", "--sims", "10", "--seed", "7", "--out", dir / "b.json"}).code, 0);
    ASSERT_EQ(cli({"meta", "--fixture", "person", "--sims", "10", "--seed", "7", "--workers", "5", "--out",
                   dir / "c.json"})
                  .code,
              0);
    const auto a = slurp(dir.path() / "a.json");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir.path() / "b.json"));
    EXPECT_EQ(a, slurp(dir.path() / "c.json"));
}

TEST(Cli, MetaFrequencyCsv) {
    TempDir dir;
    ASSERT_EQ(cli({"meta", "--fixture", "order", "--seed", "3", "--out-csv", dir / "f.csv"}).code, 0);
    const auto csv = slurp(dir.path() / "f.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "source_id,target_id,frequency,mean_score,selected");
    EXPECT_EQ(cli({"meta", "--fixture", "order", "--repetitions", "2", "--out-csv", dir / "g.csv"}).code, 1);
    EXPECT_FALSE(fs::exists(dir.path() / "g.csv"));
}

TEST(Cli, RunWritesResultAndTrace) {
    TempDir dir;
    const auto r = cli({"run", "--fixture", "person", "--seed", "1", "--out", dir / "run.json", "--trace", dir / "t.jsonl"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("correct 6/6 (100%)"), std::string::npos) << r.out;
    const auto result = nlohmann::json::parse(slurp(dir.path() / "run.json"));
    EXPECT_EQ(result.at("matched").size(), 6u);
    std::istringstream trace(slurp(dir.path() / "t.jsonl"));
    std::string line;
    std::size_t matches = 0;
    while (std::getline(trace, line)) matches += nlohmann::json::parse(line).contains("event");
    EXPECT_EQ(matches, 6u);
}

TEST(Cli, SweepAndReproduce) {
    TempDir dir;
    const auto sweep = cli({"sweep", "--fixture", "person", "--repetitions", "2", "--out-csv", dir / "s.csv"});
    ASSERT_EQ(sweep.code, 0) << sweep.err;
    EXPECT_EQ(slurp(dir.path() / "s.csv"), "sims,mean_pct\n3,100\n10,100\n");
    const auto repro = cli({"reproduce", "--seed", "42", "--out-csv", dir / "t.csv"});
    ASSERT_EQ(repro.code, 0) << repro.err;
    EXPECT_EQ(reflex_smas::parse_experiment_csv(slurp(dir.path() / "t.csv")).size(), 9u);
    EXPECT_NE(repro.out.find("COMA"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(cli({"run", "--fixture", "order", "--sims", "0"}).code, 1);
    EXPECT_EQ(cli({"run", "--fixture", "order", "--threshold-lo", "0.9", "--threshold-hi", "0.2"}).code, 1);
    EXPECT_EQ(cli({"run", "--fixture", "order", "--measures", "cosine"}).code, 1);
    EXPECT_EQ(cli({"run", "--fixture", "order", "--patience", "1"}).code, 1);
    EXPECT_EQ(cli({"run", "--fixture", "nowhere"}).code, 1);
    EXPECT_EQ(cli({"run"}).code, 1);
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({"run", "--scenario", "/nonexistent/x.json"}).code, 2);
    EXPECT_EQ(cli({"eval", "/nonexistent/r.json"}).code, 2);
    EXPECT_EQ(cli({"sweep", "--fixture", "person", "--sims-values", "3,0"}).code, 1);

    const auto unknown = cli({"meta", "--fixture", "person", "--bogus"});
    EXPECT_EQ(unknown.code, 1);
    EXPECT_NE(unknown.err.find("--bogus"), std::string::npos);
    EXPECT_NE(unknown.err.find("--fixture"), std::string::npos); // usage text
}

TEST(Cli, ScenarioErrorsNameTheField) {
    TempDir dir;
    {
        std::ofstream f(dir / "bad.json");
        f << R"({"name":"B","source":[{"id":"a","name":"x"}],"target":[{"id":"b","name":"y"}],)"
          << R"("expected":[["a","zz"]],"band":"low"})";
    }
    const auto r = cli({"run", "--scenario", dir / "bad.json"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("expected[0]"), std::string::npos) << r.err;
    {
        std::ofstream f(dir / "broken.json");
        f << "{\"name\": ";
    }
    EXPECT_EQ(cli({"eval", dir / "broken.json"}).code, 2);
    EXPECT_EQ(cli({"eval", dir / "bad.json"}).code, 2);
}

TEST(Cli, ScenarioFileMatchesFixture) {
    const std::string path = std::string(REFLEX_SMAS_SOURCE_DIR) + "/data/fixtures/order.json";
    EXPECT_EQ(cli({"run", "--scenario", path, "--seed", "5"}).out, cli({"run", "--fixture", "order", "--seed", "5"}).out);
}

TEST(Cli, HelpMatchesParser) {
    App app;
    auto& root = app.parser();
    for (const auto* sub : root.get_subcommands({})) {
        const std::string help = sub->help();
        for (const auto* opt : sub->get_options()) {
            for (const auto& name : opt->get_lnames()) EXPECT_NE(help.find("--" + name), std::string::npos) << sub->get_name() << " --" << name;
        }
        const std::regex flag(R"(--[a-z][a-z-]*)");
        for (auto it = std::sregex_iterator(help.begin(), help.end(), flag); it != std::sregex_iterator(); ++it) {
            const std::string f = it->str();
            if (f == "--help" || f == "--help-all") continue;
            EXPECT_NE(sub->get_option_no_throw(f), nullptr) << sub->get_name() << " documents unknown " << f;
        }
    }
    const auto r = cli({"--help"});
    EXPECT_EQ(r.code, 0);
    for (const char* cmd : {"fixtures", "run", "meta", "eval", "sweep", "reproduce"}) EXPECT_NE(r.out.find(cmd), std::string::npos);
}

TEST(Cli, SeedFromEnvironment) {
    TempDir dir;
    EXPECT_EQ(run_binary(dir.path(), "run --fixture order --out env.json", "REFLEX_SM_SEED=9"), 0);
    EXPECT_EQ(run_binary(dir.path(), "run --fixture order --seed 9 --out flag.json"), 0);
    EXPECT_EQ(run_binary(dir.path(), "run --fixture order --seed 9 --out both.json", "REFLEX_SM_SEED=1"), 0);
    const auto env = slurp(dir.path() / "env.json");
    EXPECT_NE(env.find("\"seed\": 9"), std::string::npos);
    EXPECT_EQ(env, slurp(dir.path() / "flag.json"));
    EXPECT_EQ(env, slurp(dir.path() / "both.json"));
    EXPECT_EQ(run_binary(dir.path(), "fixtures", "REFLEX_SM_SEED=abc"), 1);
}

TEST(Cli, WritesOnlyWhereFlagsPoint) {
    TempDir dir;
    const auto before = listing(dir.path());
    ASSERT_EQ(run_binary(dir.path(), "meta --fixture person --sims 3 --out r.json --out-csv f.csv"), 0);
    ASSERT_EQ(run_binary(dir.path(), "eval r.json --out e.json --out-csv t.csv"), 0);
    ASSERT_EQ(run_binary(dir.path(), "run --fixture order --out run.json --trace tr.jsonl"), 0);
    ASSERT_EQ(run_binary(dir.path(), "sweep --fixture person --repetitions 1 --out-csv s.csv"), 0);
    ASSERT_EQ(run_binary(dir.path(), "fixtures"), 0);
    ASSERT_EQ(run_binary(dir.path(), "run --fixture order --sims 0 --out never.json"), 1);
    auto after = listing(dir.path());
    for (const auto& n : before) after.erase(n);
    EXPECT_EQ(after, (std::set<std::string>{"r.json", "f.csv", "e.json", "t.csv", "run.json", "tr.jsonl", "s.csv",
                                            "stdout.txt", "stderr.txt"}));
}
