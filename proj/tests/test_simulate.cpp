#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace pomdpq;
using namespace testing_support;

namespace {

bool same_report(const SimulationReport& a, const SimulationReport& b) {
    return a.runs == b.runs && a.runs_hit == b.runs_hit && a.runs_stayed == b.runs_stayed &&
           a.runs_hit_late == b.runs_hit_late && a.first_hit_min == b.first_hit_min &&
           a.first_hit_max == b.first_hit_max && a.late_visits == b.late_visits;
}

}  // namespace

TEST(Draw, UniformBelowStaysInRange) {
    std::mt19937_64 rng(1);
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 3000; ++i) ++counts[detail::uniform_below(rng, 3)];
    for (int c : counts) EXPECT_GT(c, 800);
}

TEST(Draw, FollowsExactWeights) {
    std::mt19937_64 rng(2);
    const Distribution d{{0, Rational(1, 6)}, {1, Rational(1, 3)}, {2, Rational(1, 2)}};
    std::vector<int> counts(3, 0);
    const int n = 60000;
    for (int i = 0; i < n; ++i) ++counts[detail::draw(rng, d)];
    EXPECT_NEAR(counts[0], n / 6, 600);
    EXPECT_NEAR(counts[1], n / 3, 800);
    EXPECT_NEAR(counts[2], n / 2, 800);
}

TEST(Simulate, DeterministicForASeed) {
    const auto doc = gen_example1();
    SimulationOptions opt;
    opt.runs = 500;
    opt.steps = 30;
    opt.seed = 99;
    opt.target = {3};
    const auto s = uniform_memoryless_strategy(doc.pomdp);
    const auto a = simulate(doc.pomdp, s, 0, opt), b = simulate(doc.pomdp, s, 0, opt);
    EXPECT_TRUE(same_report(a, b));
    opt.seed = 100;
    EXPECT_FALSE(same_report(a, simulate(doc.pomdp, s, 0, opt)));
}

TEST(Simulate, ThreadCountDoesNotChangeTheReport) {
    const auto doc = gen_reach_family(2);
    SimulationOptions opt;
    opt.runs = 301;
    opt.steps = 40;
    opt.seed = 5;
    opt.target = doc.objective->target;
    const auto s = uniform_memoryless_strategy(doc.pomdp);
    const auto one = simulate(doc.pomdp, s, 0, opt);
    for (unsigned t : {2u, 3u, 8u}) {
        opt.threads = t;
        EXPECT_TRUE(same_report(one, simulate(doc.pomdp, s, 0, opt))) << t << " threads";
    }
}

TEST(Simulate, ReachCounterHitsAtStepSeven) {
    const auto doc = gen_reach_family(2);
    SimulationOptions opt;
    opt.runs = 1000;
    opt.steps = 20;
    opt.seed = 42;
    opt.target = doc.objective->target;
    const auto r = simulate(doc.pomdp, reach_family_counter(doc.pomdp, primorial(2)), 0, opt);
    EXPECT_EQ(r.runs_hit, 1000u);
    EXPECT_EQ(r.first_hit_min, std::optional<std::uint64_t>(7));
    EXPECT_EQ(r.first_hit_max, std::optional<std::uint64_t>(7));
    EXPECT_EQ(r.late_visits[*doc.pomdp.find_state("sink")], 0u);
}

TEST(Simulate, SafetyCounterNeverVisitsBad) {
    const auto doc = gen_safety_family(2);
    SimulationOptions opt;
    opt.runs = 500;
    opt.steps = 400;
    opt.seed = 8;
    opt.target = doc.objective->target;
    const auto r = simulate(doc.pomdp, safety_family_counter(doc.pomdp, 2), 0, opt);
    EXPECT_EQ(r.runs_stayed, 500u);
    const auto u = simulate(doc.pomdp, uniform_memoryless_strategy(doc.pomdp), 0, opt);
    EXPECT_EQ(u.runs_stayed, 0u);
}

TEST(Simulate, RejectsBadOptions) {
    const auto doc = gen_example1();
    const auto s = uniform_memoryless_strategy(doc.pomdp);
    SimulationOptions opt;
    opt.runs = 0;
    EXPECT_THROW(simulate(doc.pomdp, s, 0, opt), std::invalid_argument);
    opt.runs = 1;
    EXPECT_THROW(simulate(doc.pomdp, s, 9, opt), std::out_of_range);
}

TEST(Simulate, ReportFormats) {
    const auto doc = gen_reach_family(2);
    SimulationOptions opt;
    opt.runs = 10;
    opt.steps = 20;
    opt.seed = 1;
    opt.target = doc.objective->target;
    const auto r = simulate(doc.pomdp, reach_family_counter(doc.pomdp, primorial(2)), 0, opt);
    const auto kv = format_report_kv(doc.pomdp, r);
    EXPECT_NE(kv.find("runs=10\nsteps=20\nseed=1\nruns_hit=10\n"), std::string::npos) << kv;
    EXPECT_NE(kv.find("late_visits.Goal=60\n"), std::string::npos) << kv;
    EXPECT_NE(format_report_text(doc.pomdp, r).find("Goal"), std::string::npos);
}

TEST(Simulate, AgreesWithExactCheckOnSureOutcomes) {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 40; ++i) {
        const auto p = random_pomdp(rng, 4, 2, 2);
        const auto t = random_subset(rng, 4);
        const auto s = uniform_memoryless_strategy(p);
        SimulationOptions opt;
        opt.runs = 300;
        opt.steps = 50;
        opt.seed = static_cast<std::uint64_t>(i);
        opt.target = t;
        const auto r = simulate(p, s, 0, opt);
        const auto safe = check_strategy(p, s, 0, Objective::safe(t));
        if (safe == QualitativeVerdict::one) EXPECT_EQ(r.runs_stayed, r.runs);
        if (safe == QualitativeVerdict::zero) EXPECT_LT(r.runs_stayed, r.runs);
        if (check_strategy(p, s, 0, Objective::reach(t)) == QualitativeVerdict::zero) EXPECT_EQ(r.runs_hit, 0u);
    }
}
