#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>
#include <vector>

#include "pomdpq/graph.hpp"
#include "pomdpq/model.hpp"

namespace pomdpq {

/// A POMDP of perfect observation: every observation is a singleton.
class Mdp {
public:
    explicit Mdp(Pomdp model) : model_(std::move(model)) {
        if (!model_.is_perfect_observation())
            throw std::invalid_argument("Mdp requires singleton observations");
    }
    const Pomdp& pomdp() const { return model_; }
    std::size_t num_states() const { return model_.num_states(); }
    std::size_t num_actions() const { return model_.num_actions(); }

    /// Gives every state of `p` its own observation (named after the state).
    static Mdp with_perfect_observation(const Pomdp& p) {
        std::vector<Observation> obs;
        for (StateId s = 0; s < p.num_states(); ++s) obs.push_back({p.state_name(s), {s}});
        std::vector<Distribution> trans;
        for (StateId s = 0; s < p.num_states(); ++s)
            for (ActionId a = 0; a < p.num_actions(); ++a) trans.push_back(p.transition(s, a));
        return Mdp(Pomdp(p.state_names(), p.action_names(), std::move(obs), std::move(trans), p.initial()));
    }

private:
    Pomdp model_;
};

struct EndComponent {
    StateSet states;
    /// Allowed actions, parallel to `states`.
    std::vector<std::vector<ActionId>> actions;
};

using EndComponentDecomposition = std::vector<EndComponent>;

/// Winning region plus a pure memoryless witness (one action per state;
/// states outside the region get action 0).
struct MdpSolution {
    StateSet winning;
    std::vector<ActionId> strategy;
};

namespace detail {

/// Supports of the transition function: succ[s * m + a].
struct SupportMdp {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<StateSet> succ;

    const StateSet& at(StateId s, ActionId a) const { return succ[static_cast<std::size_t>(s) * m + a]; }

    static SupportMdp from(const Pomdp& p) {
        SupportMdp g{p.num_states(), p.num_actions(), {}};
        g.succ.reserve(g.n * g.m);
        for (StateId s = 0; s < g.n; ++s)
            for (ActionId a = 0; a < g.m; ++a) g.succ.push_back(successors(p, s, a));
        return g;
    }
};

using Mask = std::vector<char>;

inline bool all_in(const StateSet& set, const Mask& mask) {
    return std::all_of(set.begin(), set.end(), [&](StateId t) { return mask[t] != 0; });
}

/// Backward breadth-first ranks: 0 on targets inside `region`, k + 1 on region
/// states having an enabled action with a successor of rank k; -1 elsewhere.
/// `enabled` is indexed like SupportMdp::succ; empty means all enabled.
inline std::vector<int> reach_ranks(const SupportMdp& g, const Mask& region, const Mask& enabled,
                                    const Mask& target) {
    std::vector<std::vector<std::pair<StateId, ActionId>>> pred(g.n);
    for (StateId s = 0; s < g.n; ++s) {
        if (!region[s]) continue;
        for (ActionId a = 0; a < g.m; ++a) {
            if (!enabled.empty() && !enabled[s * g.m + a]) continue;
            for (StateId t : g.at(s, a)) pred[t].push_back({s, a});
        }
    }
    std::vector<int> rank(g.n, -1);
    std::deque<StateId> queue;
    for (StateId s = 0; s < g.n; ++s)
        if (region[s] && target[s]) {
            rank[s] = 0;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        StateId t = queue.front();
        queue.pop_front();
        for (auto [s, a] : pred[t])
            if (rank[s] == -1) {
                rank[s] = rank[t] + 1;
                queue.push_back(s);
            }
    }
    return rank;
}

/// Smallest enabled action of `s` with a successor of strictly smaller rank.
inline ActionId descending_action(const SupportMdp& g, StateId s, const std::vector<int>& rank, const Mask& enabled) {
    for (ActionId a = 0; a < g.m; ++a) {
        if (!enabled.empty() && !enabled[s * g.m + a]) continue;
        for (StateId t : g.at(s, a))
            if (rank[t] >= 0 && rank[t] < rank[s]) return a;
    }
    return 0;
}

struct RegionStrategy {
    Mask win;
    std::vector<ActionId> choice;
};

inline Mask enabled_within(const SupportMdp& g, const Mask& region) {
    Mask enabled(g.n * g.m, 0);
    for (StateId s = 0; s < g.n; ++s)
        if (region[s])
            for (ActionId a = 0; a < g.m; ++a) enabled[s * g.m + a] = all_in(g.at(s, a), region);
    return enabled;
}

inline RegionStrategy positive_reach(const SupportMdp& g, const Mask& region, const Mask& target) {
    Mask reg = region;
    for (StateId s = 0; s < g.n; ++s) reg[s] = reg[s] || target[s];
    auto rank = reach_ranks(g, reg, {}, target);
    RegionStrategy r{Mask(g.n, 0), std::vector<ActionId>(g.n, 0)};
    for (StateId s = 0; s < g.n; ++s) {
        r.win[s] = rank[s] >= 0;
        if (rank[s] > 0) r.choice[s] = descending_action(g, s, rank, {});
    }
    return r;
}

/// Almost-sure reachability of `target` while staying in `region`
/// (iterated pruning of states that cannot reach the target with positive
/// probability without risking to leave the current candidate set).
inline RegionStrategy almost_sure_reach(const SupportMdp& g, const Mask& region, const Mask& target) {
    Mask win(g.n, 0);
    for (StateId s = 0; s < g.n; ++s) win[s] = region[s] || target[s];
    std::vector<int> rank;
    Mask enabled;
    for (;;) {
        enabled = enabled_within(g, win);
        rank = reach_ranks(g, win, enabled, target);
        Mask next(g.n, 0);
        for (StateId s = 0; s < g.n; ++s) next[s] = rank[s] >= 0;
        if (next == win) break;
        win = std::move(next);
    }
    RegionStrategy r{win, std::vector<ActionId>(g.n, 0)};
    for (StateId s = 0; s < g.n; ++s) {
        if (!win[s]) continue;
        if (rank[s] > 0) {
            r.choice[s] = descending_action(g, s, rank, enabled);
        } else {
            for (ActionId a = 0; a < g.m; ++a)
                if (enabled[s * g.m + a]) {
                    r.choice[s] = a;
                    break;
                }
        }
    }
    return r;
}

/// Greatest set inside `safe` where some action keeps all successors inside.
inline RegionStrategy almost_sure_safe(const SupportMdp& g, const Mask& safe) {
    Mask win = safe;
    bool changed = true;
    while (changed) {
        changed = false;
        for (StateId s = 0; s < g.n; ++s) {
            if (!win[s]) continue;
            bool ok = false;
            for (ActionId a = 0; a < g.m && !ok; ++a) ok = all_in(g.at(s, a), win);
            if (!ok) {
                win[s] = 0;
                changed = true;
            }
        }
    }
    RegionStrategy r{win, std::vector<ActionId>(g.n, 0)};
    for (StateId s = 0; s < g.n; ++s)
        if (win[s])
            for (ActionId a = 0; a < g.m; ++a)
                if (all_in(g.at(s, a), win)) {
                    r.choice[s] = a;
                    break;
                }
    return r;
}

inline RegionStrategy positive_safe(const SupportMdp& g, const Mask& safe) {
    auto core = almost_sure_safe(g, safe);
    auto rank = reach_ranks(g, safe, {}, core.win);
    RegionStrategy r{Mask(g.n, 0), core.choice};
    for (StateId s = 0; s < g.n; ++s) {
        r.win[s] = rank[s] >= 0;
        if (rank[s] > 0) r.choice[s] = descending_action(g, s, rank, {});
    }
    return r;
}

/// Maximal end components of the sub-MDP induced by `region`.
inline EndComponentDecomposition mec_decomposition(const SupportMdp& g, const Mask& region) {
    Mask alive = region;
    Mask enabled = enabled_within(g, alive);
    for (;;) {
        graph::Adjacency adj(g.n);
        for (StateId s = 0; s < g.n; ++s)
            if (alive[s])
                for (ActionId a = 0; a < g.m; ++a)
                    if (enabled[s * g.m + a])
                        for (StateId t : g.at(s, a)) adj[s].push_back(t);
        auto comp = graph::scc_index(adj, &alive);
        bool changed = false;
        for (StateId s = 0; s < g.n; ++s) {
            if (!alive[s]) continue;
            bool any = false;
            for (ActionId a = 0; a < g.m; ++a) {
                auto& e = enabled[s * g.m + a];
                if (!e) continue;
                for (StateId t : g.at(s, a))
                    if (!alive[t] || comp[t] != comp[s]) {
                        e = 0;
                        changed = true;
                        break;
                    }
                any = any || e;
            }
            if (!any) {
                alive[s] = 0;
                changed = true;
            }
        }
        if (!changed) {
            EndComponentDecomposition out;
            std::map<int, std::size_t> slot;
            for (StateId s = 0; s < g.n; ++s) {
                if (!alive[s]) continue;
                auto [it, fresh] = slot.try_emplace(comp[s], out.size());
                if (fresh) out.emplace_back();
                auto& ec = out[it->second];
                ec.states.push_back(s);
                ec.actions.emplace_back();
                for (ActionId a = 0; a < g.m; ++a)
                    if (enabled[s * g.m + a]) ec.actions.back().push_back(a);
            }
            return out;
        }
    }
}

/// Almost-sure (or positive) parity via good end components: for each even
/// priority d, the MECs of the states with priority >= d that contain a
/// priority-d state; inside such a component the witness steers towards the
/// priority-d states using only component actions.
inline RegionStrategy parity(const SupportMdp& g, const std::vector<unsigned>& prio, Mode mode) {
    Mask good(g.n, 0);
    std::vector<ActionId> choice(g.n, 0);
    std::vector<unsigned> evens;
    for (unsigned p : prio)
        if (p % 2 == 0) evens.push_back(p);
    std::sort(evens.begin(), evens.end());
    evens.erase(std::unique(evens.begin(), evens.end()), evens.end());

    for (unsigned d : evens) {
        Mask sub(g.n, 0);
        for (StateId s = 0; s < g.n; ++s) sub[s] = prio[s] >= d;
        for (const auto& ec : mec_decomposition(g, sub)) {
            bool has_d = std::any_of(ec.states.begin(), ec.states.end(), [&](StateId s) { return prio[s] == d; });
            if (!has_d) continue;
            Mask in_ec(g.n, 0), ec_enabled(g.n * g.m, 0), hit(g.n, 0);
            for (std::size_t i = 0; i < ec.states.size(); ++i) {
                StateId s = ec.states[i];
                in_ec[s] = 1;
                hit[s] = prio[s] == d;
                for (ActionId a : ec.actions[i]) ec_enabled[s * g.m + a] = 1;
            }
            auto rank = reach_ranks(g, in_ec, ec_enabled, hit);
            for (std::size_t i = 0; i < ec.states.size(); ++i) {
                StateId s = ec.states[i];
                if (good[s]) continue;
                good[s] = 1;
                choice[s] = rank[s] > 0 ? descending_action(g, s, rank, ec_enabled) : ec.actions[i].front();
            }
        }
    }
    Mask all(g.n, 1);
    RegionStrategy r = mode == Mode::almost_sure ? almost_sure_reach(g, all, good) : positive_reach(g, all, good);
    for (StateId s = 0; s < g.n; ++s)
        if (good[s]) r.choice[s] = choice[s];
    return r;
}

inline std::vector<unsigned> buchi_priorities(std::size_t n, const StateSet& target, bool co) {
    std::vector<unsigned> prio(n, 1);
    for (StateId s : target)
        if (s < n) prio[s] = co ? 2 : 0;
    return prio;
}

}  // namespace detail

inline EndComponentDecomposition mec_decomposition(const Mdp& mdp) {
    auto g = detail::SupportMdp::from(mdp.pomdp());
    return detail::mec_decomposition(g, detail::Mask(g.n, 1));
}

/// Bottom strongly connected components of a Markov chain given as a
/// one-action model.
inline std::vector<StateSet> bscc_decomposition(const Pomdp& chain) {
    if (chain.num_actions() != 1) throw std::invalid_argument("bscc_decomposition expects a one-action model");
    graph::Adjacency adj(chain.num_states());
    for (StateId s = 0; s < chain.num_states(); ++s) adj[s] = successors(chain, s, 0);
    return graph::bottom_sccs(adj);
}

/// Qualitative solution of a perfect-observation MDP for any objective kind.
inline MdpSolution mdp_winning_set(const Mdp& mdp, const Objective& obj, Mode mode) {
    using namespace detail;
    const auto g = SupportMdp::from(mdp.pomdp());
    const Mask t1 = to_mask(obj.target, g.n);
    RegionStrategy r;
    switch (obj.kind) {
        case ObjectiveKind::reach:
            r = mode == Mode::almost_sure ? almost_sure_reach(g, Mask(g.n, 1), t1) : positive_reach(g, Mask(g.n, 1), t1);
            break;
        case ObjectiveKind::safe:
            r = mode == Mode::almost_sure ? almost_sure_safe(g, t1) : positive_safe(g, t1);
            break;
        case ObjectiveKind::until: {
            const Mask t2 = to_mask(obj.target2, g.n);
            r = mode == Mode::almost_sure ? almost_sure_reach(g, t1, t2) : positive_reach(g, t1, t2);
            break;
        }
        case ObjectiveKind::buchi:
            r = parity(g, buchi_priorities(g.n, obj.target, false), mode);
            break;
        case ObjectiveKind::cobuchi:
            r = parity(g, buchi_priorities(g.n, obj.target, true), mode);
            break;
        case ObjectiveKind::parity:
            if (obj.priority.size() != g.n) throw std::invalid_argument("parity priority map is not total");
            r = parity(g, obj.priority, mode);
            break;
    }
    MdpSolution out{from_mask(r.win), r.choice};
    for (StateId s = 0; s < g.n; ++s)
        if (!r.win[s]) out.strategy[s] = 0;
    return out;
}

}  // namespace pomdpq
