#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pomdpq/fm_strategy.hpp"
#include "pomdpq/graph.hpp"
#include "pomdpq/model.hpp"

namespace pomdpq {

/// The strategy does not fit the model on some reachable configuration.
class StrategyMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProductState {
    StateId state;
    MemoryId memory;
    friend bool operator==(const ProductState&, const ProductState&) = default;
};

/// Markov chain over reachable (state, memory) pairs. Successor lists are
/// sorted by target index and carry exact weights summing to 1.
struct ProductChain {
    std::vector<ProductState> states;
    std::vector<std::vector<std::pair<std::uint32_t, Rational>>> succ;
    std::uint32_t initial = 0;

    std::size_t size() const { return states.size(); }
};

enum class QualitativeVerdict { zero, positive, one };

inline const char* to_string(QualitativeVerdict v) {
    switch (v) {
        case QualitativeVerdict::zero: return "Zero";
        case QualitativeVerdict::positive: return "Positive";
        case QualitativeVerdict::one: return "One";
    }
    return "?";
}

namespace detail {

/// Resolves the model's observation/action ids to the strategy's by name.
struct StrategyBinding {
    std::vector<int> obs_to_strategy;     // model obs -> strategy obs (-1 when missing)
    std::vector<int> action_to_model;     // strategy action -> model action (-1 when missing)

    StrategyBinding(const Pomdp& p, const FiniteMemoryStrategy& s) {
        obs_to_strategy.assign(p.num_observations(), -1);
        for (ObsId o = 0; o < p.num_observations(); ++o) {
            auto it = std::find(s.observations.begin(), s.observations.end(), p.observations()[o].name);
            if (it != s.observations.end()) obs_to_strategy[o] = static_cast<int>(it - s.observations.begin());
        }
        action_to_model.assign(s.actions.size(), -1);
        for (ActionId a = 0; a < s.actions.size(); ++a)
            if (auto m = p.find_action(s.actions[a])) action_to_model[a] = static_cast<int>(*m);
    }

    ObsId strategy_obs(const Pomdp& p, StateId l) const {
        ObsId o = p.obs(l);
        if (o == Pomdp::kNoObs || obs_to_strategy[o] < 0)
            throw StrategyMismatch("strategy has no observation for state " + p.state_name(l));
        return static_cast<ObsId>(obs_to_strategy[o]);
    }
};

}  // namespace detail

/// Reachable product of the model with a finite-memory strategy from
/// (from, initial memory).
inline ProductChain product_chain(const Pomdp& p, const FiniteMemoryStrategy& strat, StateId from) {
    if (from >= p.num_states()) throw std::out_of_range("start state out of range");
    if (strat.initial >= strat.memory_size()) throw StrategyMismatch("initial memory out of range");
    const detail::StrategyBinding bind(p, strat);
    ProductChain chain;
    std::unordered_map<std::uint64_t, std::uint32_t> index;
    auto key = [&](StateId l, MemoryId m) { return static_cast<std::uint64_t>(l) * strat.memory_size() + m; };
    auto intern = [&](StateId l, MemoryId m) {
        auto [it, fresh] = index.try_emplace(key(l, m), static_cast<std::uint32_t>(chain.states.size()));
        if (fresh) {
            chain.states.push_back({l, m});
            chain.succ.emplace_back();
        }
        return it->second;
    };
    chain.initial = intern(from, strat.initial);
    for (std::uint32_t i = 0; i < chain.states.size(); ++i) {
        const auto [l, m] = chain.states[i];
        const ObsId so = bind.strategy_obs(p, l);
        const auto& dist = strat.next(m, so);
        if (!dist)
            throw StrategyMismatch("next action undefined for memory " + strat.memory_labels[m] + " and observation " +
                                   strat.observations[so]);
        std::vector<std::pair<std::uint32_t, Rational>> out;
        for (const auto& [sa, pa] : *dist) {
            if (!pa.is_positive()) continue;
            if (sa >= strat.actions.size() || bind.action_to_model[sa] < 0)
                throw StrategyMismatch("strategy action not defined by the model");
            const auto ma = static_cast<ActionId>(bind.action_to_model[sa]);
            const auto& trans = p.transition(l, ma);
            if (trans.empty())
                throw StrategyMismatch("transition " + p.state_name(l) + " " + p.action_name(ma) + " is undefined");
            for (const auto& [t, pt] : trans) {
                if (!pt.is_positive()) continue;
                const ObsId so2 = bind.strategy_obs(p, t);
                const auto& upd = strat.update(m, so2, sa);
                if (!upd || *upd >= strat.memory_size())
                    throw StrategyMismatch("memory update undefined for memory " + strat.memory_labels[m] +
                                           ", observation " + strat.observations[so2] + ", action " +
                                           strat.actions[sa]);
                out.push_back({intern(t, *upd), pa * pt});
            }
        }
        std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        std::vector<std::pair<std::uint32_t, Rational>> merged;
        for (const auto& e : out) {
            if (!merged.empty() && merged.back().first == e.first)
                merged.back().second += e.second;
            else
                merged.push_back(e);
        }
        chain.succ[i] = std::move(merged);
    }
    return chain;
}

namespace detail {

/// Reachable bottom SCCs of the chain after making `absorbing` states sinks.
inline std::vector<std::vector<std::uint32_t>> reachable_bsccs(const ProductChain& chain,
                                                               const std::vector<char>& absorbing,
                                                               std::vector<char>* reach_out = nullptr) {
    graph::Adjacency adj(chain.size());
    for (std::uint32_t i = 0; i < chain.size(); ++i) {
        if (absorbing[i]) {
            adj[i].push_back(i);
            continue;
        }
        for (const auto& [j, w] : chain.succ[i])
            if (w.is_positive()) adj[i].push_back(j);
    }
    auto reach = graph::reachable_from(adj, {chain.initial});
    std::vector<std::vector<std::uint32_t>> out;
    for (auto& b : graph::bottom_sccs(adj))
        if (reach[b.front()]) out.push_back(std::move(b));
    if (reach_out) *reach_out = std::move(reach);
    return out;
}

}  // namespace detail

/// Qualitative probability (zero / positive but not one / one) that the
/// chain's plays satisfy the objective, with the objective read on the model
/// component of product states.
inline QualitativeVerdict exact_check(const ProductChain& chain, const Objective& obj) {
    const std::size_t n = chain.size();
    auto lifted = [&](const StateSet& set) {
        std::vector<char> mask(n, 0);
        for (std::size_t i = 0; i < n; ++i) mask[i] = contains(set, chain.states[i].state);
        return mask;
    };
    auto classify = [](std::size_t good, std::size_t total) {
        if (good == 0) return QualitativeVerdict::zero;
        return good == total ? QualitativeVerdict::one : QualitativeVerdict::positive;
    };
    auto count_if = [](const auto& bsccs, auto pred) {
        return static_cast<std::size_t>(std::count_if(bsccs.begin(), bsccs.end(), pred));
    };

    switch (obj.kind) {
        case ObjectiveKind::reach: {
            auto t = lifted(obj.target);
            auto b = detail::reachable_bsccs(chain, t);
            return classify(count_if(b, [&](const auto& c) { return t[c.front()] != 0; }), b.size());
        }
        case ObjectiveKind::until: {
            auto t1 = lifted(obj.target), t2 = lifted(obj.target2);
            std::vector<char> stop(n, 0);
            for (std::size_t i = 0; i < n; ++i) stop[i] = t2[i] || !t1[i];
            auto b = detail::reachable_bsccs(chain, stop);
            return classify(count_if(b, [&](const auto& c) { return t2[c.front()] != 0; }), b.size());
        }
        case ObjectiveKind::safe: {
            auto t = lifted(obj.target);
            std::vector<char> bad(n, 0);
            for (std::size_t i = 0; i < n; ++i) bad[i] = !t[i];
            auto b = detail::reachable_bsccs(chain, bad);
            auto inside = [&](const auto& c) {
                return std::all_of(c.begin(), c.end(), [&](std::uint32_t i) { return t[i] != 0; });
            };
            return classify(count_if(b, inside), b.size());
        }
        case ObjectiveKind::buchi:
        case ObjectiveKind::cobuchi:
        case ObjectiveKind::parity: {
            std::vector<unsigned> prio(n, 1);
            if (obj.kind == ObjectiveKind::parity) {
                for (std::size_t i = 0; i < n; ++i) prio[i] = obj.priority.at(chain.states[i].state);
            } else {
                auto t = lifted(obj.target);
                for (std::size_t i = 0; i < n; ++i)
                    if (t[i]) prio[i] = obj.kind == ObjectiveKind::buchi ? 0 : 2;
            }
            auto b = detail::reachable_bsccs(chain, std::vector<char>(n, 0));
            auto even_min = [&](const auto& c) {
                unsigned lo = prio[c.front()];
                for (auto i : c) lo = std::min(lo, prio[i]);
                return lo % 2 == 0;
            };
            return classify(count_if(b, even_min), b.size());
        }
    }
    return QualitativeVerdict::zero;
}

/// Shorthand: build the product chain and check it.
inline QualitativeVerdict check_strategy(const Pomdp& p, const FiniteMemoryStrategy& s, StateId from,
                                         const Objective& obj) {
    return exact_check(product_chain(p, s, from), obj);
}

}  // namespace pomdpq
