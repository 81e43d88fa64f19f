#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pomdpq/model.hpp"

namespace pomdpq {

using MemoryId = std::uint32_t;
using ActionDistribution = std::vector<std::pair<ActionId, Rational>>;

/// Observation-based finite-memory strategy as a Moore machine.
///
/// Semantics on a play l0 a0 l1 a1 ...: memory starts at `initial`; in step
/// t the action is drawn from next(m_t, obs(l_t)); after the move to l_{t+1}
/// the memory becomes update(m_t, obs(l_{t+1}), a_t). Observations and
/// actions are referred to by name, so a strategy binds to any model that
/// declares the same names.
struct FiniteMemoryStrategy {
    std::string name = "strategy";
    std::vector<std::string> observations;
    std::vector<std::string> actions;
    std::vector<std::string> memory_labels;
    MemoryId initial = 0;
    /// Indexed by (m * |obs| + o) * |actions| + a.
    std::vector<std::optional<MemoryId>> update_table;
    /// Indexed by m * |obs| + o.
    std::vector<std::optional<ActionDistribution>> next_table;

    std::size_t memory_size() const { return memory_labels.size(); }

    /// Allocates empty tables for `memory` states over the model's
    /// observations and actions.
    static FiniteMemoryStrategy for_model(const Pomdp& p, std::size_t memory) {
        FiniteMemoryStrategy s;
        for (const auto& o : p.observations()) s.observations.push_back(o.name);
        s.actions = p.action_names();
        s.memory_labels.resize(memory);
        for (std::size_t m = 0; m < memory; ++m) s.memory_labels[m] = "m" + std::to_string(m);
        s.update_table.assign(memory * s.observations.size() * s.actions.size(), std::nullopt);
        s.next_table.assign(memory * s.observations.size(), std::nullopt);
        return s;
    }

    std::optional<MemoryId>& update(MemoryId m, ObsId o, ActionId a) {
        return update_table[(static_cast<std::size_t>(m) * observations.size() + o) * actions.size() + a];
    }
    const std::optional<MemoryId>& update(MemoryId m, ObsId o, ActionId a) const {
        return update_table[(static_cast<std::size_t>(m) * observations.size() + o) * actions.size() + a];
    }
    std::optional<ActionDistribution>& next(MemoryId m, ObsId o) {
        return next_table[static_cast<std::size_t>(m) * observations.size() + o];
    }
    const std::optional<ActionDistribution>& next(MemoryId m, ObsId o) const {
        return next_table[static_cast<std::size_t>(m) * observations.size() + o];
    }

    /// Sets update(m, o, a) for every observation and action.
    void set_update_all(MemoryId m, MemoryId target) {
        for (ObsId o = 0; o < observations.size(); ++o)
            for (ActionId a = 0; a < actions.size(); ++a) update(m, o, a) = target;
    }

    friend bool operator==(const FiniteMemoryStrategy&, const FiniteMemoryStrategy&) = default;
};

inline ActionDistribution pure(ActionId a) { return {{a, Rational(1)}}; }

inline ActionDistribution uniform_over(const std::vector<ActionId>& actions) {
    ActionDistribution d;
    for (ActionId a : actions) d.push_back({a, Rational(1, static_cast<std::int64_t>(actions.size()))});
    return d;
}

/// The randomized memoryless strategy playing every action uniformly.
inline FiniteMemoryStrategy uniform_memoryless_strategy(const Pomdp& p) {
    auto s = FiniteMemoryStrategy::for_model(p, 1);
    s.name = "uniform";
    s.memory_labels[0] = "any";
    std::vector<ActionId> all(p.num_actions());
    for (ActionId a = 0; a < all.size(); ++a) all[a] = a;
    for (ObsId o = 0; o < p.num_observations(); ++o) s.next(0, o) = uniform_over(all);
    s.set_update_all(0, 0);
    return s;
}

/// Pure memoryless strategy playing action_of_obs[o] under observation o.
inline FiniteMemoryStrategy memoryless_strategy(const Pomdp& p, const std::vector<ActionId>& action_of_obs) {
    auto s = FiniteMemoryStrategy::for_model(p, 1);
    s.name = "memoryless";
    s.memory_labels[0] = "any";
    for (ObsId o = 0; o < p.num_observations(); ++o) s.next(0, o) = pure(action_of_obs.at(o));
    s.set_update_all(0, 0);
    return s;
}

/// Memoryless strategy for a perfect-observation model from a per-state
/// action choice.
inline FiniteMemoryStrategy memoryless_from_states(const Pomdp& p, const std::vector<ActionId>& action_of_state) {
    std::vector<ActionId> by_obs(p.num_observations(), 0);
    for (ObsId o = 0; o < p.num_observations(); ++o)
        if (!p.observations()[o].members.empty()) by_obs[o] = action_of_state.at(p.observations()[o].members.front());
    return memoryless_strategy(p, by_obs);
}

}  // namespace pomdpq
