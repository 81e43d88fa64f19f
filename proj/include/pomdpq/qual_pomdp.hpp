#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "pomdpq/belief.hpp"
#include "pomdpq/fm_strategy.hpp"
#include "pomdpq/graph.hpp"
#include "pomdpq/mdp.hpp"
#include "pomdpq/model.hpp"

namespace pomdpq {

/// Outcome of a qualitative query. A refusal (decidable == false) carries
/// the reason and no winning information; a witness is only attached to
/// winning verdicts.
struct Verdict {
    bool decidable = true;
    bool winning = false;
    StateSet winning_states;
    std::optional<FiniteMemoryStrategy> witness;
    std::optional<std::string> refusal_reason;

    static Verdict refusal(std::string reason) {
        Verdict v;
        v.decidable = false;
        v.refusal_reason = std::move(reason);
        return v;
    }
};

/// Decidability class of an (objective, mode) query for POMDPs. For a
/// two-priority parity objective, `kind` is the equivalent Büchi or coBüchi
/// kind.
struct Classification {
    bool decidable = false;
    ObjectiveKind kind = ObjectiveKind::reach;
    std::string description;
};

inline Classification classify(const Objective& obj, Mode mode) {
    const bool as = mode == Mode::almost_sure;
    switch (obj.kind) {
        case ObjectiveKind::reach:
            return {true, obj.kind, as ? "almost-sure reachability (belief-support fixpoint)" : "positive reachability (graph reachability)"};
        case ObjectiveKind::safe:
            return {true, obj.kind, as ? "almost-sure safety (knowledge-based subset construction)"
                                       : "positive safety (reach the almost-sure safe states inside T)"};
        case ObjectiveKind::buchi:
            if (as) return {true, obj.kind, "almost-sure Büchi (belief-support fixpoint)"};
            return {false, obj.kind, "positive Büchi is undecidable for POMDPs"};
        case ObjectiveKind::cobuchi:
            if (!as) return {true, obj.kind, "positive coBüchi (reach the almost-sure safe states)"};
            return {false, obj.kind, "almost-sure coBüchi is undecidable for POMDPs"};
        case ObjectiveKind::until:
            if (!as) return {true, obj.kind, "positive until (graph reachability inside T1)"};
            return {false, obj.kind, "almost-sure until is not supported"};
        case ObjectiveKind::parity: {
            auto within = [&](unsigned lo, unsigned hi) {
                return std::all_of(obj.priority.begin(), obj.priority.end(),
                                   [&](unsigned p) { return p >= lo && p <= hi; });
            };
            if (within(0, 1) && as) return {true, ObjectiveKind::buchi, "parity with priorities {0,1} solved as almost-sure Büchi"};
            if (within(1, 2) && !as) return {true, ObjectiveKind::cobuchi, "parity with priorities {1,2} solved as positive coBüchi"};
            return {false, obj.kind, as ? "almost-sure parity is undecidable for POMDPs" : "positive parity is undecidable for POMDPs"};
        }
    }
    return {false, obj.kind, "unknown objective"};
}

/// Copy of `p` where every state of `set` loops to itself under all actions.
inline Pomdp make_absorbing(const Pomdp& p, const StateSet& set) {
    std::vector<Distribution> trans;
    for (StateId s = 0; s < p.num_states(); ++s)
        for (ActionId a = 0; a < p.num_actions(); ++a)
            trans.push_back(contains(set, s) ? Distribution{{s, Rational(1)}} : p.transition(s, a));
    return Pomdp(p.state_names(), p.action_names(), p.observations(), std::move(trans), p.initial());
}

/// States with a support-graph path into T.
inline StateSet graph_reach(const Pomdp& p, const StateSet& target, const StateSet* through = nullptr) {
    auto rev = graph::reverse(support_graph(p));
    std::vector<char> seen(p.num_states(), 0);
    std::deque<StateId> queue;
    for (StateId t : target) {
        seen[t] = 1;
        queue.push_back(t);
    }
    while (!queue.empty()) {
        StateId t = queue.front();
        queue.pop_front();
        for (StateId s : rev[t])
            if (!seen[s] && (through == nullptr || contains(*through, s))) {
                seen[s] = 1;
                queue.push_back(s);
            }
    }
    return from_mask(seen);
}

/// Shortest support-graph path from `from` to a state of `goal` whose
/// intermediate states (and `from`) satisfy `allowed` (empty = all states).
/// Ties go to the smallest next-state id; each step uses the smallest action
/// producing it. Returns the action word and the reached goal state.
struct PathWitness {
    std::vector<ActionId> word;
    std::vector<StateId> states;
};

inline std::optional<PathWitness> shortest_path(const Pomdp& p, StateId from, const StateSet& goal,
                                                const StateSet* allowed) {
    auto ok = [&](StateId s) { return allowed == nullptr || contains(*allowed, s); };
    if (contains(goal, from)) return PathWitness{{}, {from}};
    if (!ok(from)) return std::nullopt;
    auto adj = support_graph(p);
    std::vector<int> parent(p.num_states(), -1);
    std::vector<char> seen(p.num_states(), 0);
    std::deque<StateId> queue{from};
    seen[from] = 1;
    std::optional<StateId> hit;
    while (!queue.empty() && !hit) {
        StateId s = queue.front();
        queue.pop_front();
        for (StateId t : adj[s]) {
            if (seen[t]) continue;
            seen[t] = 1;
            parent[t] = static_cast<int>(s);
            if (contains(goal, t)) {
                hit = t;
                break;
            }
            if (ok(t)) queue.push_back(t);
        }
    }
    if (!hit) return std::nullopt;
    PathWitness w;
    for (StateId s = *hit;; s = static_cast<StateId>(parent[s])) {
        w.states.push_back(s);
        if (s == from) break;
    }
    std::reverse(w.states.begin(), w.states.end());
    for (std::size_t i = 0; i + 1 < w.states.size(); ++i) {
        const auto l = w.states[i], next = w.states[i + 1];
        for (ActionId a = 0; a < p.num_actions(); ++a)
            if (contains(successors(p, l, a), next)) {
                w.word.push_back(a);
                break;
            }
    }
    return w;
}

/// Pure strategy replaying a fixed action word, then playing the first
/// action forever. Memory: one position per letter plus a final state.
inline FiniteMemoryStrategy word_strategy(const Pomdp& p, const std::vector<ActionId>& word) {
    auto s = FiniteMemoryStrategy::for_model(p, word.size() + 1);
    s.name = "path";
    for (MemoryId i = 0; i <= word.size(); ++i) {
        s.memory_labels[i] = i < word.size() ? "step " + std::to_string(i) : "done";
        for (ObsId o = 0; o < p.num_observations(); ++o) s.next(i, o) = pure(i < word.size() ? word[i] : 0);
        s.set_update_all(i, std::min<MemoryId>(i + 1, static_cast<MemoryId>(word.size())));
    }
    return s;
}

namespace detail {

/// Phase 1 replays `word` blindly; phase 2 runs the sure-safe cell strategy
/// of `game` started from cell {start}. Unexpected observations lead to an
/// absorbing fallback memory that plays the first action.
inline FiniteMemoryStrategy phased_cell_strategy(const Pomdp& p, const std::vector<ActionId>& word, StateId start,
                                                 const KnowledgeGame& game, const SureSafeCells& win) {
    const auto start_cell = game.find(Cell{start});
    std::vector<CellId> order;
    std::vector<int> slot(game.cells.size(), -1);
    std::deque<CellId> queue;
    auto visit = [&](CellId c) {
        if (slot[c] >= 0) return;
        slot[c] = static_cast<int>(order.size());
        order.push_back(c);
        queue.push_back(c);
    };
    visit(*start_cell);
    while (!queue.empty()) {
        CellId c = queue.front();
        queue.pop_front();
        for (CellId d : game.successors(c, *win.action[c])) visit(d);
    }

    const std::size_t k = word.size();
    const auto fallback = static_cast<MemoryId>(k + order.size());
    auto s = FiniteMemoryStrategy::for_model(p, k + order.size() + 1);
    s.name = k == 0 ? "cells" : "path-then-cells";
    auto cell_mem = [&](CellId c) { return static_cast<MemoryId>(k + slot[c]); };
    const ObsId start_obs = p.obs(start);

    for (MemoryId i = 0; i < k; ++i) {
        s.memory_labels[i] = "step " + std::to_string(i);
        for (ObsId o = 0; o < p.num_observations(); ++o) {
            s.next(i, o) = pure(word[i]);
            for (ActionId a = 0; a < p.num_actions(); ++a)
                s.update(i, o, a) = i + 1 < k ? i + 1 : (o == start_obs ? cell_mem(*start_cell) : fallback);
        }
    }
    for (CellId c : order) {
        const MemoryId m = cell_mem(c);
        const Cell& cell = game.cells[c];
        const ActionId act = *win.action[c];
        s.memory_labels[m] = cell_label(p, cell);
        for (ObsId o = 0; o < p.num_observations(); ++o) {
            s.next(m, o) = pure(o == p.obs(cell.front()) ? act : 0);
            for (ActionId a = 0; a < p.num_actions(); ++a) s.update(m, o, a) = fallback;
        }
        for (auto& [o, part] : split_post(p, cell, act))
            if (auto d = game.find(part); d && slot[*d] >= 0) s.update(m, o, act) = cell_mem(*d);
    }
    s.memory_labels[fallback] = "fallback";
    for (ObsId o = 0; o < p.num_observations(); ++o) s.next(fallback, o) = pure(0);
    s.set_update_all(fallback, fallback);
    s.initial = k == 0 ? cell_mem(*start_cell) : 0;
    return s;
}

struct SafetyAnalysis {
    KnowledgeGame game;
    SureSafeCells win;
    StateSet safe_states;  // states whose singleton cell is sure-safe
};

inline SafetyAnalysis analyze_safety(const Pomdp& p, const StateSet& target, StateId from) {
    std::vector<Cell> seeds{{from}};
    for (StateId l : target) seeds.push_back({l});
    SafetyAnalysis r{knowledge_game(p, target, seeds), {}, {}};
    r.win = sure_safe_cells(r.game);
    for (StateId l : target)
        if (auto c = r.game.find(Cell{l}); c && r.win.wins(*c)) r.safe_states.push_back(l);
    return r;
}

/// Greatest set of belief supports B such that some action keeps every
/// successor support inside the set and every state of every support can
/// reach a target state through allowed actions. Playing the allowed actions
/// uniformly keeps the belief-state product inside the set and visits the
/// target infinitely often with probability one.
struct BeliefBuchi {
    BeliefGraph graph;
    std::vector<char> alive;
    std::vector<std::vector<ActionId>> allow;
};

inline BeliefBuchi almost_sure_buchi_beliefs(const Pomdp& p, const StateSet& target, std::span<const Cell> seeds) {
    BeliefBuchi r{belief_graph(p, seeds), {}, {}};
    const auto& g = r.graph;
    const std::size_t nc = g.cells.size();
    std::vector<std::size_t> offset(nc + 1, 0);
    for (CellId c = 0; c < nc; ++c) offset[c + 1] = offset[c] + g.cells[c].size();
    auto index_in = [&](CellId c, StateId l) {
        const auto& cell = g.cells[c];
        return offset[c] + static_cast<std::size_t>(std::lower_bound(cell.begin(), cell.end(), l) - cell.begin());
    };

    r.alive.assign(nc, 1);
    r.allow.assign(nc, {});
    for (;;) {
        bool changed = false;
        for (CellId c = 0; c < nc; ++c) {
            r.allow[c].clear();
            if (!r.alive[c]) continue;
            for (ActionId a = 0; a < g.num_actions; ++a) {
                const auto& succ = g.successors(c, a);
                if (!succ.empty() &&
                    std::all_of(succ.begin(), succ.end(), [&](const auto& e) { return r.alive[e.second] != 0; }))
                    r.allow[c].push_back(a);
            }
            if (r.allow[c].empty()) {
                r.alive[c] = 0;
                changed = true;
            }
        }
        if (changed) continue;

        std::vector<std::vector<std::size_t>> rev(offset[nc]);
        std::vector<char> reached(offset[nc], 0);
        std::deque<std::size_t> queue;
        for (CellId c = 0; c < nc; ++c) {
            if (!r.alive[c]) continue;
            for (StateId l : g.cells[c]) {
                const std::size_t from = index_in(c, l);
                if (contains(target, l)) {
                    reached[from] = 1;
                    queue.push_back(from);
                }
                for (ActionId a : r.allow[c])
                    for (StateId t : successors(p, l, a)) {
                        const CellId d = *g.successor(c, a, p.obs(t));
                        rev[index_in(d, t)].push_back(from);
                    }
            }
        }
        while (!queue.empty()) {
            auto v = queue.front();
            queue.pop_front();
            for (auto u : rev[v])
                if (!reached[u]) {
                    reached[u] = 1;
                    queue.push_back(u);
                }
        }
        for (CellId c = 0; c < nc; ++c) {
            if (!r.alive[c]) continue;
            for (std::size_t i = offset[c]; i < offset[c + 1]; ++i)
                if (!reached[i]) {
                    r.alive[c] = 0;
                    changed = true;
                    break;
                }
        }
        if (!changed) return r;
    }
}

/// Allowed actions of a belief with duplicates removed: an action that acts
/// like an earlier allowed action on every state of the belief is dropped.
inline std::vector<ActionId> distinct_actions(const Pomdp& p, const Cell& cell, const std::vector<ActionId>& allowed) {
    std::vector<ActionId> out;
    for (ActionId a : allowed) {
        auto same = [&](ActionId b) {
            return std::all_of(cell.begin(), cell.end(), [&](StateId l) { return p.transition(l, a) == p.transition(l, b); });
        };
        if (std::none_of(out.begin(), out.end(), same)) out.push_back(a);
    }
    return out;
}

/// Belief-support strategy: memory is the current support, actions are
/// drawn uniformly from the distinct allowed actions.
inline FiniteMemoryStrategy belief_strategy(const Pomdp& p, const BeliefBuchi& bb, CellId start) {
    const auto& g = bb.graph;
    std::vector<std::vector<ActionId>> play(g.cells.size());
    for (CellId c = 0; c < g.cells.size(); ++c)
        if (bb.alive[c]) play[c] = distinct_actions(p, g.cells[c], bb.allow[c]);
    std::vector<CellId> order;
    std::vector<int> slot(g.cells.size(), -1);
    std::deque<CellId> queue;
    auto visit = [&](CellId c) {
        if (slot[c] >= 0) return;
        slot[c] = static_cast<int>(order.size());
        order.push_back(c);
        queue.push_back(c);
    };
    visit(start);
    while (!queue.empty()) {
        CellId c = queue.front();
        queue.pop_front();
        for (ActionId a : play[c])
            for (auto [o, d] : g.successors(c, a)) visit(d);
    }
    const auto fallback = static_cast<MemoryId>(order.size());
    auto s = FiniteMemoryStrategy::for_model(p, order.size() + 1);
    s.name = "beliefs";
    for (CellId c : order) {
        const auto m = static_cast<MemoryId>(slot[c]);
        const Cell& cell = g.cells[c];
        s.memory_labels[m] = cell_label(p, cell);
        for (ObsId o = 0; o < p.num_observations(); ++o) {
            s.next(m, o) = o == p.obs(cell.front()) ? uniform_over(play[c]) : pure(0);
            for (ActionId a = 0; a < p.num_actions(); ++a) {
                auto d = g.successor(c, a, o);
                bool played = std::find(play[c].begin(), play[c].end(), a) != play[c].end();
                s.update(m, o, a) = (played && d && slot[*d] >= 0) ? static_cast<MemoryId>(slot[*d]) : fallback;
            }
        }
    }
    s.memory_labels[fallback] = "fallback";
    for (ObsId o = 0; o < p.num_observations(); ++o) s.next(fallback, o) = pure(0);
    s.set_update_all(fallback, fallback);
    s.initial = static_cast<MemoryId>(slot[start]);
    return s;
}

inline Verdict almost_sure_buchi_like(const Pomdp& model, const StateSet& target, StateId from) {
    std::vector<Cell> seeds{{from}};
    for (StateId l = 0; l < model.num_states(); ++l) seeds.push_back({l});
    auto bb = almost_sure_buchi_beliefs(model, target, seeds);
    Verdict v;
    for (StateId l = 0; l < model.num_states(); ++l)
        if (bb.alive[*bb.graph.find(Cell{l})]) v.winning_states.push_back(l);
    v.winning = contains(v.winning_states, from);
    if (v.winning) v.witness = belief_strategy(model, bb, *bb.graph.find(Cell{from}));
    return v;
}

}  // namespace detail

/// Positive reachability: graph reachability; the witness plays all actions
/// uniformly at random.
inline Verdict pos_reach(const Pomdp& p, const StateSet& target, StateId from) {
    Verdict v;
    v.winning_states = graph_reach(p, target);
    v.winning = contains(v.winning_states, from);
    if (v.winning) v.witness = uniform_memoryless_strategy(p);
    return v;
}

/// Pure linear-memory alternative witness for positive reachability.
inline std::optional<FiniteMemoryStrategy> pos_reach_path_strategy(const Pomdp& p, const StateSet& target,
                                                                    StateId from) {
    auto path = shortest_path(p, from, target, nullptr);
    if (!path) return std::nullopt;
    return word_strategy(p, path->word);
}

/// Positive until: a support-graph path through T1 into T2.
inline Verdict pos_until(const Pomdp& p, const StateSet& t1, const StateSet& t2, StateId from) {
    Verdict v;
    v.winning_states = graph_reach(p, t2, &t1);
    v.winning = contains(v.winning_states, from);
    if (v.winning) v.witness = uniform_memoryless_strategy(p);
    return v;
}

/// Almost-sure safety: {from} must be a sure-safe cell of the knowledge game.
inline Verdict as_safe(const Pomdp& p, const StateSet& target, StateId from) {
    auto sa = detail::analyze_safety(p, target, from);
    Verdict v;
    v.winning_states = sa.safe_states;
    v.winning = contains(v.winning_states, from);
    if (v.winning) v.witness = detail::phased_cell_strategy(p, {}, from, sa.game, sa.win);
    return v;
}

namespace detail {

inline Verdict reach_safe_states(const Pomdp& p, const StateSet& target, StateId from, bool stay_in_target) {
    auto sa = analyze_safety(p, target, from);
    Verdict v;
    v.winning_states = graph_reach(p, sa.safe_states, stay_in_target ? &target : nullptr);
    v.winning = contains(v.winning_states, from);
    if (v.winning) {
        auto path = shortest_path(p, from, sa.safe_states, stay_in_target ? &target : nullptr);
        v.witness = phased_cell_strategy(p, path->word, path->states.back(), sa.game, sa.win);
    }
    return v;
}

}  // namespace detail

/// Positive safety: reach, while staying in T, a state whose singleton cell
/// is almost-sure safe; then play the cell strategy from there.
inline Verdict pos_safe(const Pomdp& p, const StateSet& target, StateId from) {
    return detail::reach_safe_states(p, target, from, true);
}

/// Positive coBüchi: reach (anyhow) a state whose singleton cell is
/// almost-sure safe for T; then play the cell strategy from there.
inline Verdict pos_cobuchi(const Pomdp& p, const StateSet& target, StateId from) {
    return detail::reach_safe_states(p, target, from, false);
}

/// Almost-sure reachability on the model with T made absorbing.
inline Verdict as_reach(const Pomdp& p, const StateSet& target, StateId from) {
    auto v = detail::almost_sure_buchi_like(make_absorbing(p, target), target, from);
    if (v.witness) v.witness->name = "reach";
    return v;
}

inline Verdict as_buchi(const Pomdp& p, const StateSet& target, StateId from) {
    return detail::almost_sure_buchi_like(p, target, from);
}

/// Dispatches a query to its decision procedure. Undecidable classes are
/// refused before any work on the model.
inline Verdict solve(const Pomdp& p, const Objective& obj, Mode mode, StateId from) {
    const auto cls = classify(obj, mode);
    if (!cls.decidable) return Verdict::refusal(cls.description);
    if (from >= p.num_states()) throw std::out_of_range("start state out of range");
    StateSet target = obj.target;
    if (obj.kind == ObjectiveKind::parity) {
        target.clear();
        const unsigned mark = cls.kind == ObjectiveKind::buchi ? 0 : 2;
        for (StateId s = 0; s < obj.priority.size(); ++s)
            if (obj.priority[s] == mark) target.push_back(s);
    }
    const bool as = mode == Mode::almost_sure;
    switch (cls.kind) {
        case ObjectiveKind::reach: return as ? as_reach(p, target, from) : pos_reach(p, target, from);
        case ObjectiveKind::safe: return as ? as_safe(p, target, from) : pos_safe(p, target, from);
        case ObjectiveKind::buchi: return as_buchi(p, target, from);
        case ObjectiveKind::cobuchi: return pos_cobuchi(p, target, from);
        case ObjectiveKind::until: return pos_until(p, obj.target, obj.target2, from);
        case ObjectiveKind::parity: break;
    }
    return Verdict::refusal("unsupported query");
}

}  // namespace pomdpq
