#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "cli.hpp"
#include "helpers.hpp"

using namespace pomdpq;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args, const std::string& input = "") {
    args.insert(args.begin(), "pomdpq");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
    return {code, out.str(), err.str()};
}

std::string model_path(const std::string& name) { return std::string(POMDPQ_MODELS_DIR) + "/" + name; }

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("pomdpq_test_" + name)).string();
}

}  // namespace

TEST(Cli, SolveExampleOne) {
    auto r = run({"solve", model_path("example1.pomdp")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "WINNING\n");
    r = run({"solve", model_path("example1.pomdp"), "--mode", "almost"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.out, "NOT-WINNING\n");
    r = run({"solve", model_path("example1.pomdp"), "--details"});
    EXPECT_NE(r.out.find("winning states: 0 2\n"), std::string::npos) << r.out;
}

TEST(Cli, InlineOverridesAndStdin) {
    const auto text = serialize_model(gen_example1());
    auto r = run({"solve", "-", "--objective", "reach {3}", "--from", "2"}, text);
    EXPECT_EQ(r.code, 1);
    r = run({"solve", "-", "--objective", "reach {3}", "--from", "1"}, text);
    EXPECT_EQ(r.code, 0);
    r = run({"solve", "-", "--from", "nowhere"}, text);
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("unknown state 'nowhere'"), std::string::npos);
    r = run({"solve", "-", "--mode", "sometimes"}, text);
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, UndecidableQueries) {
    const auto text = serialize_model(gen_example1());
    auto r = run({"solve", "-", "--objective", "cobuchi {0 1 2}", "--mode", "almost"}, text);
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.out.rfind("UNDECIDABLE: ", 0), 0u);
    EXPECT_EQ(run({"solve", "-", "--objective", "buchi {3}", "--mode", "positive"}, text).code, 2);
    EXPECT_EQ(run({"synthesize", "-", "--objective", "buchi {3}", "--mode", "positive"}, text).code, 2);
}

TEST(Cli, InputErrors) {
    EXPECT_EQ(run({"solve", model_path("does_not_exist.pomdp")}).code, 3);
    EXPECT_EQ(run({"solve", "-"}, "pomdp m\nstates: a\n").code, 3);
    EXPECT_EQ(run({"bogus"}).code, 3);
    EXPECT_EQ(run({}).code, 3);
    auto r = run({"solve", "-"}, "pomdp\n");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, SynthesizeThenCheckAndSimulate) {
    const auto model = temp_path("reach2.pomdp"), strat = temp_path("reach2.strat");
    auto g = run({"generate", "reach-family", "2"});
    ASSERT_EQ(g.code, 0);
    { std::ofstream(model) << g.out; }
    auto s = run({"synthesize", model, "--out", strat});
    ASSERT_EQ(s.code, 0) << s.err;
    auto c = run({"check", model, strat});
    EXPECT_EQ(c.code, 0);
    EXPECT_EQ(c.out, "One\n");
    auto sim = run({"simulate", model, strat, "--runs", "200", "--steps", "60", "--format", "kv"});
    EXPECT_EQ(sim.code, 0);
    EXPECT_NE(sim.out.find("runs_hit=200\n"), std::string::npos) << sim.out;
    std::remove(model.c_str());
    std::remove(strat.c_str());
}

TEST(Cli, CheckHandCounter) {
    auto c = run({"check", model_path("pprime2.pomdp"), model_path("counter.strat")});
    EXPECT_EQ(c.code, 0);
    EXPECT_EQ(c.out, "One\n");
    auto u = run({"check", model_path("example1.pomdp"), model_path("counter.strat")});
    EXPECT_EQ(u.code, 3);
}

TEST(Cli, SynthesizeLosingAndPath) {
    const auto text = serialize_model(gen_example1());
    EXPECT_EQ(run({"synthesize", "-", "--mode", "almost"}, text).code, 1);
    auto p = run({"synthesize", "-", "--objective", "reach {3}", "--path"}, text);
    EXPECT_EQ(p.code, 0);
    EXPECT_NE(p.out.find("memory: 3"), std::string::npos) << p.out;
    EXPECT_EQ(run({"synthesize", "-", "--path", "--mode", "almost"}, text).code, 3);
}

TEST(Cli, GenerateOutputsParse) {
    for (std::vector<std::string> args : {std::vector<std::string>{"generate", "example1"},
                                          {"generate", "safety-family", "3"},
                                          {"generate", "reach-family", "3"},
                                          {"generate", "cvp", model_path("or_gate.circuit")},
                                          {"generate", "cvp", model_path("or_gate.circuit"), "--variant", "safety"}}) {
        auto r = run(args);
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_EQ(run({"validate", "-"}, r.out).code, 0);
        EXPECT_EQ(serialize_model(parse_model(r.out)), r.out);
    }
    EXPECT_EQ(run({"generate", "safety-family", "0"}).code, 3);
    EXPECT_EQ(run({"generate", "cvp", "-"}, "gate g xor a b\n").code, 3);
}

TEST(Cli, ValidateListsProblems) {
    auto r = run({"validate", "-"}, "pomdp m\nstates: a b\nactions: u\nobs o { a }\ntrans a u -> a:1/2, b:1/3\n");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("not covered"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("sums to 5/6"), std::string::npos) << r.out;
    EXPECT_EQ(run({"validate", model_path("p2.pomdp")}).code, 0);
}

TEST(Cli, BeliefDump) {
    auto r = run({"belief", model_path("example1.pomdp")});
    EXPECT_EQ(r.code, 0);
    const auto doc = parse_model(r.out);
    EXPECT_EQ(doc.pomdp.num_states(), 3u);
    EXPECT_TRUE(doc.pomdp.find_state("[1|2]"));
}
