#pragma once

// Independent oracles and small utilities shared by the test binaries.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "pomdpq/pomdpq.hpp"

namespace testing_support {

using namespace pomdpq;

/// Copy of `p` without the named action.
inline Pomdp remove_action(const Pomdp& p, const std::string& name) {
    const ActionId gone = *p.find_action(name);
    std::vector<std::string> actions;
    std::vector<Distribution> trans;
    for (ActionId a = 0; a < p.num_actions(); ++a)
        if (a != gone) actions.push_back(p.action_name(a));
    for (StateId s = 0; s < p.num_states(); ++s)
        for (ActionId a = 0; a < p.num_actions(); ++a)
            if (a != gone) trans.push_back(p.transition(s, a));
    return Pomdp(p.state_names(), actions, p.observations(), trans, p.initial());
}

/// States from which some state of `target` is reachable, computed by a
/// forward search from every state over raw transition entries.
inline std::set<StateId> forward_reach_oracle(const Pomdp& p, const StateSet& target) {
    std::set<StateId> out;
    for (StateId start = 0; start < p.num_states(); ++start) {
        std::vector<bool> seen(p.num_states(), false);
        std::deque<StateId> q{start};
        seen[start] = true;
        bool hit = false;
        while (!q.empty() && !hit) {
            StateId s = q.front();
            q.pop_front();
            if (std::find(target.begin(), target.end(), s) != target.end()) hit = true;
            for (ActionId a = 0; a < p.num_actions(); ++a)
                for (const auto& [t, w] : p.transition(s, a))
                    if (w.is_positive() && !seen[t]) {
                        seen[t] = true;
                        q.push_back(t);
                    }
        }
        if (hit) out.insert(start);
    }
    return out;
}

/// Every pure memoryless strategy of a perfect-observation model, as
/// per-state action vectors.
inline std::vector<std::vector<ActionId>> all_memoryless(const Pomdp& p) {
    std::vector<std::vector<ActionId>> out;
    std::vector<ActionId> cur(p.num_states(), 0);
    for (;;) {
        out.push_back(cur);
        std::size_t i = 0;
        while (i < cur.size() && ++cur[i] == p.num_actions()) cur[i++] = 0;
        if (i == cur.size()) return out;
    }
}

inline bool satisfies(QualitativeVerdict v, Mode mode) {
    return mode == Mode::almost_sure ? v == QualitativeVerdict::one : v != QualitativeVerdict::zero;
}

/// States of a perfect-observation model won by some pure memoryless
/// strategy, each candidate checked exactly on its product chain.
inline StateSet brute_force_mdp(const Pomdp& p, const Objective& obj, Mode mode) {
    StateSet won;
    const auto all = all_memoryless(p);
    for (StateId s = 0; s < p.num_states(); ++s)
        for (const auto& choice : all)
            if (satisfies(check_strategy(p, memoryless_from_states(p, choice), s, obj), mode)) {
                won.push_back(s);
                break;
            }
    return won;
}

/// Belief supports reachable from {from} under all actions, computed with
/// plain set operations.
inline std::vector<StateSet> reachable_supports(const Pomdp& p, StateId from) {
    std::vector<StateSet> cells{{from}};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const StateSet c = cells[i];
        for (ActionId a = 0; a < p.num_actions(); ++a) {
            std::map<ObsId, std::set<StateId>> by_obs;
            for (StateId l : c)
                for (const auto& [t, w] : p.transition(l, a))
                    if (w.is_positive()) by_obs[p.obs(t)].insert(t);
            for (const auto& [o, set] : by_obs) {
                StateSet next(set.begin(), set.end());
                if (std::find(cells.begin(), cells.end(), next) == cells.end()) cells.push_back(next);
            }
        }
    }
    return cells;
}

/// Pure strategy whose memory is the current belief support and whose
/// action is `choice[cell index]`.
inline FiniteMemoryStrategy cell_strategy_from_choice(const Pomdp& p, const std::vector<StateSet>& cells,
                                                      const std::vector<ActionId>& choice) {
    auto s = FiniteMemoryStrategy::for_model(p, cells.size());
    for (MemoryId m = 0; m < cells.size(); ++m) {
        for (ObsId o = 0; o < p.num_observations(); ++o) {
            s.next(m, o) = pure(o == p.obs(cells[m].front()) ? choice[m] : 0);
            for (ActionId a = 0; a < p.num_actions(); ++a) {
                std::set<StateId> next;
                for (StateId l : cells[m])
                    for (const auto& [t, w] : p.transition(l, a))
                        if (w.is_positive() && p.obs(t) == o) next.insert(t);
                StateSet n(next.begin(), next.end());
                auto it = std::find(cells.begin(), cells.end(), n);
                s.update(m, o, a) = it == cells.end() ? 0 : static_cast<MemoryId>(it - cells.begin());
            }
        }
    }
    s.initial = 0;
    return s;
}

/// True if some pure belief-support strategy from {from} satisfies the
/// objective in the given mode.
inline bool brute_force_cells(const Pomdp& p, StateId from, const Objective& obj, Mode mode) {
    const auto cells = reachable_supports(p, from);
    std::vector<ActionId> choice(cells.size(), 0);
    for (;;) {
        auto s = cell_strategy_from_choice(p, cells, choice);
        if (satisfies(check_strategy(p, s, from, obj), mode)) return true;
        std::size_t i = 0;
        while (i < choice.size() && ++choice[i] == p.num_actions()) choice[i++] = 0;
        if (i == choice.size()) return false;
    }
}

/// Random subset of the states of `p`.
inline StateSet random_subset(std::mt19937_64& rng, std::size_t n) {
    StateSet out;
    for (StateId s = 0; s < n; ++s)
        if (rng() % 2) out.push_back(s);
    return out;
}

/// Perfect-observation version of a random model.
inline Pomdp random_mdp(std::mt19937_64& rng, std::size_t states, std::size_t actions) {
    return Mdp::with_perfect_observation(random_pomdp(rng, states, actions, 1)).pomdp();
}

}  // namespace testing_support
