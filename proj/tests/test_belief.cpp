#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace pomdpq;
using namespace testing_support;

namespace {

/// Cells of the knowledge game reachable from {from}, enumerated with plain
/// set operations.
std::set<StateSet> knowledge_cells_oracle(const Pomdp& p, const StateSet& t, StateId from) {
    std::set<StateSet> seen{{from}};
    std::vector<StateSet> todo{{from}};
    while (!todo.empty()) {
        auto c = todo.back();
        todo.pop_back();
        for (ActionId a = 0; a < p.num_actions(); ++a) {
            std::map<std::pair<ObsId, bool>, StateSet> parts;
            for (StateId l : c)
                for (const auto& [to, w] : p.transition(l, a)) parts[{p.obs(to), contains(t, to)}].push_back(to);
            for (auto& [k, part] : parts) {
                auto cell = make_state_set(part);
                if (seen.insert(cell).second) todo.push_back(cell);
            }
        }
    }
    return seen;
}

StateSet named(const Pomdp& p, std::initializer_list<const char*> names) {
    StateSet out;
    for (auto n : names) out.push_back(*p.find_state(n));
    return make_state_set(out);
}

StateSet all_but(const Pomdp& p, const char* name) {
    StateSet out;
    for (StateId s = 0; s < p.num_states(); ++s)
        if (p.state_name(s) != name) out.push_back(s);
    return out;
}

}  // namespace

TEST(CellNames, LabelsAndIdentifiers) {
    const auto p = gen_example1().pomdp;
    EXPECT_EQ(cell_label(p, {1, 2}), "{1,2}");
    EXPECT_EQ(cell_identifier(p, {1, 2}), "[1|2]");
    EXPECT_TRUE(text::is_identifier(cell_identifier(p, {0, 1, 2})));
}

TEST(KnowledgeGame, ExampleOne) {
    const auto p = gen_example1().pomdp;
    auto g = knowledge_game(p, {0, 1, 2}, 0);
    ASSERT_EQ(g.cells.size(), 3u);
    EXPECT_EQ(g.cells[0], StateSet{0});
    EXPECT_EQ(g.cells[1], (StateSet{1, 2}));
    EXPECT_EQ(g.cells[2], StateSet{3});
    EXPECT_EQ(g.safe, (std::vector<char>{1, 1, 0}));
    EXPECT_EQ(g.successors(0, 0), std::vector<CellId>{1});
    EXPECT_EQ(g.successors(1, 0), (std::vector<CellId>{1, 2}));
}

TEST(KnowledgeGame, AllSafeIsObservationSplit) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) {
        auto p = random_pomdp(rng, 5, 2, 3);
        StateSet all{0, 1, 2, 3, 4};
        auto g = knowledge_game(p, all, 0);
        auto bg = belief_graph(p, std::vector<Cell>{{0}});
        ASSERT_EQ(g.cells, bg.cells);
        for (CellId c = 0; c < g.cells.size(); ++c)
            for (ActionId a = 0; a < 2; ++a) {
                std::vector<CellId> from_belief;
                for (auto [o, d] : bg.successors(c, a)) from_belief.push_back(d);
                std::sort(from_belief.begin(), from_belief.end());
                EXPECT_EQ(g.successors(c, a), from_belief);
            }
    }
}

TEST(KnowledgeGame, SafetyFamilyTwo) {
    const auto p = gen_safety_family(2).pomdp;
    const auto t = all_but(p, "Bad");
    auto g = knowledge_game(p, t, *p.find_state("q0"));
    auto oracle = knowledge_cells_oracle(p, t, *p.find_state("q0"));
    EXPECT_EQ(std::set<StateSet>(g.cells.begin(), g.cells.end()), oracle);
    for (int j = 1; j <= 6; ++j) {
        const auto a = "q1_" + std::to_string(1 + (j - 1) % 2), b = "q2_" + std::to_string(1 + (j - 1) % 3);
        EXPECT_TRUE(g.find(named(p, {a.c_str(), b.c_str()}))) << "after " << j << " loop steps";
    }
    for (CellId c = 0; c < g.cells.size(); ++c)
        for (ActionId a = 0; a < p.num_actions(); ++a) EXPECT_FALSE(g.successors(c, a).empty());
}

TEST(KnowledgeGame, EdgesRefineBeliefSplit) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 100; ++i) {
        auto p = random_pomdp(rng, 5, 2, 3);
        auto t = random_subset(rng, 5);
        auto g = knowledge_game(p, t, 0);
        EXPECT_EQ(std::set<StateSet>(g.cells.begin(), g.cells.end()), knowledge_cells_oracle(p, t, 0));
        for (CellId c = 0; c < g.cells.size(); ++c)
            for (ActionId a = 0; a < 2; ++a) {
                StateSet joined;
                for (CellId d : g.successors(c, a)) {
                    const auto& cell = g.cells[d];
                    ASSERT_FALSE(cell.empty());
                    const bool in = contains(t, cell.front());
                    for (StateId l : cell) {
                        EXPECT_EQ(p.obs(l), p.obs(cell.front()));
                        EXPECT_EQ(contains(t, l), in);
                        joined.push_back(l);
                    }
                }
                const auto merged = make_state_set(joined);
                EXPECT_EQ(merged.size(), joined.size());
                EXPECT_EQ(merged, post(p, g.cells[c], a));
            }
    }
}

TEST(SureSafeCells, ExampleOneHasNoWinningCell) {
    auto g = knowledge_game(gen_example1().pomdp, {0, 1, 2}, 0);
    EXPECT_TRUE(sure_safe_cells(g).ids().empty());
}

TEST(SureSafeCells, AbsorbingSafeState) {
    PomdpBuilder b;
    b.add_state("s");
    b.add_action("u");
    b.add_observation("o", {0});
    b.add_transition(0, 0, 0, Rational(1));
    auto g = knowledge_game(b.build(), {0}, 0);
    auto w = sure_safe_cells(g);
    EXPECT_TRUE(w.wins(0));
    EXPECT_EQ(w.action[0], std::optional<ActionId>(0));
}

TEST(SureSafeCells, SafetyFamilyInitialCellWins) {
    for (int n : {2, 3}) {
        const auto p = gen_safety_family(n).pomdp;
        auto g = knowledge_game(p, all_but(p, "Bad"), *p.find_state("q0"));
        auto w = sure_safe_cells(g);
        EXPECT_TRUE(w.wins(g.initial));
        // Following the chosen action never leaves the winning cells.
        for (CellId c : w.ids())
            for (CellId d : g.successors(c, *w.action[c])) EXPECT_TRUE(w.wins(d));
    }
}

TEST(Antichain, Examples) {
    std::vector<Cell> cells{{0}, {1}, {0, 1}};
    EXPECT_EQ(antichain_prune(cells), (std::vector<Cell>{{0, 1}}));
    EXPECT_TRUE(antichain_prune(std::vector<Cell>{}).empty());
    EXPECT_EQ(downward_closure(std::vector<Cell>{{0, 1}}), (std::vector<Cell>{{0}, {0, 1}, {1}}));
}

TEST(Antichain, SafetyFamilyClosureRoundTrip) {
    const auto p = gen_safety_family(2).pomdp;
    const auto t = all_but(p, "Bad");
    // Seed every nonempty subset of each observation so the winning set is
    // downward closed by construction.
    std::vector<Cell> seeds;
    for (const auto& o : p.observations())
        for (const auto& c : downward_closure(std::vector<Cell>{o.members})) seeds.push_back(c);
    auto g = knowledge_game(p, t, seeds);
    auto w = sure_safe_cells(g);
    std::vector<Cell> won;
    for (CellId c : w.ids()) won.push_back(g.cells[c]);
    std::sort(won.begin(), won.end());
    EXPECT_EQ(downward_closure(antichain_prune(won)), won);
}

TEST(BeliefMdp, ExampleOneWeights) {
    auto bm = belief_mdp(gen_example1().pomdp, 0);
    ASSERT_EQ(bm.cells, (std::vector<Cell>{{0}, {1, 2}, {3}}));
    const auto& m = bm.mdp.pomdp();
    EXPECT_EQ(m.transition(0, 0), (Distribution{{1, Rational(1)}}));
    EXPECT_EQ(m.transition(1, 0), (Distribution{{1, Rational(1, 2)}, {2, Rational(1, 2)}}));
    EXPECT_EQ(m.transition(2, 0), (Distribution{{2, Rational(1)}}));
    EXPECT_EQ(m.state_name(1), "[1|2]");
}

TEST(BeliefMdp, PerfectObservationIsIsomorphic) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 30; ++i) {
        const auto p = random_mdp(rng, 4, 2);
        auto bm = belief_mdp(p, 0);
        for (CellId c = 0; c < bm.cells.size(); ++c) {
            ASSERT_EQ(bm.cells[c].size(), 1u);
            for (ActionId a = 0; a < 2; ++a) {
                StateSet succ;
                for (const auto& [d, w] : bm.mdp.pomdp().transition(c, a)) succ.push_back(bm.cells[d][0]);
                EXPECT_EQ(make_state_set(succ), successors(p, bm.cells[c][0], a));
            }
        }
    }
}

TEST(BeliefMdp, ReachFamilyCellsFollowTheTicks) {
    const auto p = gen_reach_family(2).pomdp;
    auto bm = belief_mdp(p, *p.find_state("q0"));
    const ActionId tick = *p.find_action("tick");
    CellId c = 0;
    for (int j = 1; j <= 12; ++j) {
        const auto& succ = bm.mdp.pomdp().transition(c, tick);
        ASSERT_EQ(succ.size(), 1u);
        c = succ[0].first;
        const auto a = "q1_" + std::to_string(1 + (j - 1) % 2), b = "q2_" + std::to_string(1 + (j - 1) % 3);
        EXPECT_EQ(bm.cells[c], named(p, {a.c_str(), b.c_str()})) << "after " << j << " ticks";
    }
}

TEST(BeliefMdp, SuccessorsPartitionPost) {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 100; ++i) {
        auto p = random_pomdp(rng, 5, 2, 3);
        auto bm = belief_mdp(p, 0);
        for (CellId c = 0; c < bm.cells.size(); ++c)
            for (ActionId a = 0; a < 2; ++a) {
                const auto& succ = bm.mdp.pomdp().transition(c, a);
                StateSet joined;
                Rational total;
                for (const auto& [d, w] : succ) {
                    EXPECT_EQ(w, Rational(1, static_cast<std::int64_t>(succ.size())));
                    total += w;
                    joined.insert(joined.end(), bm.cells[d].begin(), bm.cells[d].end());
                }
                EXPECT_EQ(total, Rational(1));
                const auto merged = make_state_set(joined);
                EXPECT_EQ(merged.size(), joined.size());
                EXPECT_EQ(merged, post(p, bm.cells[c], a));
            }
    }
}

TEST(BeliefMdp, Lifting) {
    auto bm = belief_mdp(gen_example1().pomdp, 0);
    EXPECT_EQ(lift_subset(bm, {0, 1, 2}), (StateSet{0, 1}));
    EXPECT_EQ(lift_meets(bm, {2}), StateSet{1});
}
