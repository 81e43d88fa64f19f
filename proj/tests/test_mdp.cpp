#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace pomdpq;
using namespace testing_support;

namespace {

Pomdp self_loops(std::size_t n) {
    PomdpBuilder b;
    for (std::size_t i = 0; i < n; ++i) b.add_state("s" + std::to_string(i));
    b.add_action("u");
    for (StateId s = 0; s < n; ++s) {
        b.add_observation("o" + std::to_string(s), {s});
        b.add_transition(s, 0, s, Rational(1));
    }
    return b.build();
}

std::vector<StateSet> mec_states(const EndComponentDecomposition& d) {
    std::vector<StateSet> out;
    for (const auto& ec : d) out.push_back(ec.states);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Objective> all_objectives(std::mt19937_64& rng, std::size_t n) {
    auto t = random_subset(rng, n), u = random_subset(rng, n);
    std::vector<unsigned> prio(n);
    for (auto& p : prio) p = static_cast<unsigned>(rng() % 4);
    return {Objective::reach(t), Objective::safe(t), Objective::buchi(t), Objective::cobuchi(t),
            Objective::until(t, u), Objective::parity(prio)};
}

}  // namespace

TEST(Mdp, RejectsPartialObservation) { EXPECT_THROW(Mdp(gen_example1().pomdp), std::invalid_argument); }

TEST(MecDecomposition, AbsorbingState) {
    auto d = mec_decomposition(Mdp(self_loops(1)));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].states, StateSet{0});
    EXPECT_EQ(d[0].actions[0], std::vector<ActionId>{0});
}

TEST(MecDecomposition, ExampleOneBeliefChain) {
    auto bm = belief_mdp(gen_example1().pomdp, 0);
    ASSERT_EQ(bm.cells.size(), 3u);
    auto d = mec_decomposition(bm.mdp);
    ASSERT_EQ(d.size(), 1u);
    ASSERT_EQ(d[0].states.size(), 1u);
    EXPECT_EQ(bm.cells[d[0].states[0]], StateSet{3});
}

TEST(MecDecomposition, ReachFamilyTwo) {
    // The tick loops are end components of the fully observed model too.
    const auto p = gen_reach_family(2).pomdp;
    auto id = [&](const char* n) { return *p.find_state(n); };
    auto d = mec_decomposition(Mdp::with_perfect_observation(p));
    std::vector<StateSet> expected{{id("Goal")}, {id("sink")}, {id("q1_1"), id("q1_2")},
                                   {id("q2_1"), id("q2_2"), id("q2_3")}};
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(mec_states(d), expected);
    for (const auto& ec : d)
        if (ec.states.size() > 1)
            for (const auto& acts : ec.actions) EXPECT_EQ(acts, std::vector<ActionId>{*p.find_action("tick")});
}

TEST(MecDecomposition, ComponentsAreClosedAndConnected) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 100; ++i) {
        const auto p = random_mdp(rng, 5, 2);
        const auto d = mec_decomposition(Mdp(p));
        std::vector<int> owner(p.num_states(), -1);
        for (std::size_t c = 0; c < d.size(); ++c) {
            const auto& ec = d[c];
            graph::Adjacency adj(p.num_states());
            for (std::size_t k = 0; k < ec.states.size(); ++k) {
                const StateId s = ec.states[k];
                EXPECT_EQ(owner[s], -1);
                owner[s] = static_cast<int>(c);
                ASSERT_FALSE(ec.actions[k].empty());
                for (ActionId a : ec.actions[k])
                    for (StateId t : successors(p, s, a)) {
                        EXPECT_TRUE(contains(ec.states, t));
                        adj[s].push_back(t);
                    }
            }
            auto reach = graph::reachable_from(adj, {ec.states.front()});
            auto back = graph::reachable_from(graph::reverse(adj), {ec.states.front()});
            for (StateId s : ec.states) EXPECT_TRUE(reach[s] && back[s]);
        }
        // Every bottom SCC of every memoryless strategy lies inside a MEC.
        for (const auto& choice : all_memoryless(p)) {
            graph::Adjacency adj(p.num_states());
            for (StateId s = 0; s < p.num_states(); ++s) adj[s] = successors(p, s, choice[s]);
            for (const auto& b : graph::bottom_sccs(adj)) {
                ASSERT_GE(owner[b.front()], 0);
                for (auto s : b) EXPECT_EQ(owner[s], owner[b.front()]);
            }
        }
    }
}

TEST(BsccDecomposition, Examples) {
    auto bm = belief_mdp(gen_example1().pomdp, 0);
    auto b = bscc_decomposition(bm.mdp.pomdp());
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(bm.cells[b[0][0]], StateSet{3});

    EXPECT_EQ(bscc_decomposition(gen_example1().pomdp), (std::vector<StateSet>{{2}, {3}}));
    EXPECT_EQ(bscc_decomposition(self_loops(2)), (std::vector<StateSet>{{0}, {1}}));
    EXPECT_THROW(bscc_decomposition(gen_reach_family(2).pomdp), std::invalid_argument);
}

TEST(MdpWinningSet, OrGateReach) {
    auto c = parse_circuit("gate g or x y\ninput x 1\ninput y 0\n");
    auto doc = gen_cvp_reach(c);
    auto sol = mdp_winning_set(Mdp(doc.pomdp), *doc.objective, Mode::almost_sure);
    EXPECT_TRUE(contains(sol.winning, 0));
    EXPECT_EQ(doc.pomdp.action_name(sol.strategy[0]), "l");
    EXPECT_EQ(brute_force_mdp(doc.pomdp, *doc.objective, Mode::almost_sure), sol.winning);
}

TEST(MdpWinningSet, SafeEverywhere) {
    std::mt19937_64 rng(2);
    const auto p = random_mdp(rng, 5, 2);
    StateSet all{0, 1, 2, 3, 4};
    EXPECT_EQ(mdp_winning_set(Mdp(p), Objective::safe(all), Mode::almost_sure).winning, all);
}

TEST(MdpWinningSet, ExampleOneBeliefMdpPositiveSafe) {
    auto bm = belief_mdp(gen_example1().pomdp, 0);
    auto safe = lift_subset(bm, {0, 1, 2});
    EXPECT_EQ(safe.size(), 2u);
    EXPECT_TRUE(mdp_winning_set(bm.mdp, Objective::safe(safe), Mode::positive).winning.empty());
}

TEST(MdpWinningSet, MatchesMemorylessEnumeration) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 150; ++i) {
        const std::size_t n = 2 + rng() % 4;
        const auto p = random_mdp(rng, n, 1 + rng() % 2);
        for (const auto& obj : all_objectives(rng, n))
            for (Mode mode : {Mode::almost_sure, Mode::positive}) {
                const auto sol = mdp_winning_set(Mdp(p), obj, mode);
                EXPECT_EQ(sol.winning, brute_force_mdp(p, obj, mode))
                    << to_string(obj.kind) << " " << to_string(mode) << "\n"
                    << serialize_model(p);
                const auto witness = memoryless_from_states(p, sol.strategy);
                for (StateId s : sol.winning)
                    EXPECT_TRUE(satisfies(check_strategy(p, witness, s, obj), mode))
                        << to_string(obj.kind) << " " << to_string(mode) << " from " << s << "\n"
                        << serialize_model(p);
            }
    }
}

TEST(MdpWinningSet, Containments) {
    std::mt19937_64 rng(8);
    auto subset = [](const StateSet& a, const StateSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); };
    for (int i = 0; i < 200; ++i) {
        const auto p = random_mdp(rng, 5, 2);
        const Mdp m(p);
        auto t = random_subset(rng, 5);
        auto bigger = make_state_set([&] {
            auto v = t;
            for (StateId s : random_subset(rng, 5)) v.push_back(s);
            return v;
        }());
        for (auto make : {&Objective::reach, &Objective::safe, &Objective::buchi, &Objective::cobuchi}) {
            const auto as = mdp_winning_set(m, make(t), Mode::almost_sure).winning;
            const auto pos = mdp_winning_set(m, make(t), Mode::positive).winning;
            EXPECT_TRUE(subset(as, pos));
            for (Mode mode : {Mode::almost_sure, Mode::positive})
                EXPECT_TRUE(subset(mdp_winning_set(m, make(t), mode).winning, mdp_winning_set(m, make(bigger), mode).winning));
        }
        for (Mode mode : {Mode::almost_sure, Mode::positive}) {
            EXPECT_TRUE(subset(mdp_winning_set(m, Objective::buchi(t), mode).winning,
                               mdp_winning_set(m, Objective::reach(t), mode).winning));
            EXPECT_TRUE(subset(mdp_winning_set(m, Objective::safe(t), mode).winning,
                               mdp_winning_set(m, Objective::cobuchi(t), mode).winning));
        }
        const auto oracle = forward_reach_oracle(p, t);
        EXPECT_EQ(mdp_winning_set(m, Objective::reach(t), Mode::positive).winning, StateSet(oracle.begin(), oracle.end()));
    }
}
