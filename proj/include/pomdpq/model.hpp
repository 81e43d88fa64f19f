#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pomdpq/rational.hpp"

namespace pomdpq {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;
using ObsId = std::uint32_t;

/// Sorted, duplicate-free list of state ids.
using StateSet = std::vector<StateId>;

inline StateSet make_state_set(std::vector<StateId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

inline bool contains(const StateSet& set, StateId s) { return std::binary_search(set.begin(), set.end(), s); }

inline std::vector<char> to_mask(const StateSet& set, std::size_t n) {
    std::vector<char> mask(n, 0);
    for (StateId s : set)
        if (s < n) mask[s] = 1;
    return mask;
}

inline StateSet from_mask(const std::vector<char>& mask) {
    StateSet out;
    for (std::size_t s = 0; s < mask.size(); ++s)
        if (mask[s]) out.push_back(static_cast<StateId>(s));
    return out;
}

/// Sparse distribution over states, sorted by state id.
using Distribution = std::vector<std::pair<StateId, Rational>>;

struct Observation {
    std::string name;
    StateSet members;
};

/// A partially-observable MDP: states, actions, an observation partition and
/// an exact rational transition function. The object holds whatever it was
/// built with; `validate` reports whether the model invariants hold.
class Pomdp {
public:
    Pomdp() = default;
    Pomdp(std::vector<std::string> state_names, std::vector<std::string> action_names,
          std::vector<Observation> observations, std::vector<Distribution> transitions,
          std::optional<StateId> initial = std::nullopt)
        : state_names_(std::move(state_names)),
          action_names_(std::move(action_names)),
          observations_(std::move(observations)),
          transitions_(std::move(transitions)),
          initial_(initial) {
        transitions_.resize(state_names_.size() * action_names_.size());
        obs_of_.assign(state_names_.size(), kNoObs);
        for (ObsId o = 0; o < observations_.size(); ++o)
            for (StateId s : observations_[o].members)
                if (s < obs_of_.size() && obs_of_[s] == kNoObs) obs_of_[s] = o;
    }

    static constexpr ObsId kNoObs = static_cast<ObsId>(-1);

    std::size_t num_states() const { return state_names_.size(); }
    std::size_t num_actions() const { return action_names_.size(); }
    std::size_t num_observations() const { return observations_.size(); }

    const std::vector<std::string>& state_names() const { return state_names_; }
    const std::vector<std::string>& action_names() const { return action_names_; }
    const std::vector<Observation>& observations() const { return observations_; }
    const std::string& state_name(StateId s) const { return state_names_.at(s); }
    const std::string& action_name(ActionId a) const { return action_names_.at(a); }

    /// Observation containing `s` (the first one listing it), or kNoObs.
    ObsId obs(StateId s) const { return obs_of_.at(s); }

    const Distribution& transition(StateId s, ActionId a) const {
        return transitions_.at(static_cast<std::size_t>(s) * num_actions() + a);
    }
    std::optional<StateId> initial() const { return initial_; }

    std::optional<StateId> find_state(const std::string& name) const { return find(state_names_, name); }
    std::optional<ActionId> find_action(const std::string& name) const { return find(action_names_, name); }
    std::optional<ObsId> find_observation(const std::string& name) const {
        for (ObsId o = 0; o < observations_.size(); ++o)
            if (observations_[o].name == name) return o;
        return std::nullopt;
    }

    bool is_perfect_observation() const {
        if (observations_.size() != num_states()) return false;
        for (const auto& o : observations_)
            if (o.members.size() != 1) return false;
        return true;
    }

    friend bool operator==(const Pomdp& a, const Pomdp& b) {
        return a.state_names_ == b.state_names_ && a.action_names_ == b.action_names_ &&
               a.transitions_ == b.transitions_ && a.initial_ == b.initial_ &&
               std::equal(a.observations_.begin(), a.observations_.end(), b.observations_.begin(),
                          b.observations_.end(), [](const Observation& x, const Observation& y) {
                              return x.name == y.name && x.members == y.members;
                          });
    }

private:
    static std::optional<std::uint32_t> find(const std::vector<std::string>& names, const std::string& name) {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) return std::nullopt;
        return static_cast<std::uint32_t>(it - names.begin());
    }

    std::vector<std::string> state_names_;
    std::vector<std::string> action_names_;
    std::vector<Observation> observations_;
    std::vector<Distribution> transitions_;  // indexed by state * num_actions + action
    std::optional<StateId> initial_;
    std::vector<ObsId> obs_of_;
};

/// Incremental construction of a Pomdp by name.
class PomdpBuilder {
public:
    StateId add_state(std::string name) {
        states_.push_back(std::move(name));
        return static_cast<StateId>(states_.size() - 1);
    }
    ActionId add_action(std::string name) {
        actions_.push_back(std::move(name));
        return static_cast<ActionId>(actions_.size() - 1);
    }
    ObsId add_observation(std::string name, std::vector<StateId> members) {
        observations_.push_back({std::move(name), make_state_set(std::move(members))});
        return static_cast<ObsId>(observations_.size() - 1);
    }
    /// Adds weight to (s, a) -> t, merging with an existing entry.
    void add_transition(StateId s, ActionId a, StateId t, Rational weight) {
        pending_.push_back({s, a, t, weight});
    }
    void set_initial(StateId s) { initial_ = s; }

    std::size_t num_states() const { return states_.size(); }
    std::size_t num_actions() const { return actions_.size(); }

    Pomdp build() const {
        std::vector<Distribution> trans(states_.size() * actions_.size());
        for (const auto& p : pending_) {
            auto& dist = trans.at(static_cast<std::size_t>(p.s) * actions_.size() + p.a);
            auto it = std::lower_bound(dist.begin(), dist.end(), p.t,
                                       [](const auto& e, StateId t) { return e.first < t; });
            if (it != dist.end() && it->first == p.t)
                it->second += p.w;
            else
                dist.insert(it, {p.t, p.w});
        }
        return Pomdp(states_, actions_, observations_, std::move(trans), initial_);
    }

private:
    struct Pending {
        StateId s;
        ActionId a;
        StateId t;
        Rational w;
    };
    std::vector<std::string> states_;
    std::vector<std::string> actions_;
    std::vector<Observation> observations_;
    std::vector<Pending> pending_;
    std::optional<StateId> initial_;
};

enum class ObjectiveKind { reach, safe, until, buchi, cobuchi, parity };
enum class Mode { almost_sure, positive };

inline const char* to_string(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::reach: return "reach";
        case ObjectiveKind::safe: return "safe";
        case ObjectiveKind::until: return "until";
        case ObjectiveKind::buchi: return "buchi";
        case ObjectiveKind::cobuchi: return "cobuchi";
        case ObjectiveKind::parity: return "parity";
    }
    return "?";
}

inline const char* to_string(Mode m) { return m == Mode::almost_sure ? "almost" : "positive"; }

/// Reach/Safe/Buchi/coBuchi use `target`; Until(T1, T2) uses `target` as T1
/// and `target2` as T2; Parity uses `priority` (one entry per state).
struct Objective {
    ObjectiveKind kind = ObjectiveKind::reach;
    StateSet target;
    StateSet target2;
    std::vector<unsigned> priority;

    static Objective reach(StateSet t) { return {ObjectiveKind::reach, make_state_set(std::move(t)), {}, {}}; }
    static Objective safe(StateSet t) { return {ObjectiveKind::safe, make_state_set(std::move(t)), {}, {}}; }
    static Objective buchi(StateSet t) { return {ObjectiveKind::buchi, make_state_set(std::move(t)), {}, {}}; }
    static Objective cobuchi(StateSet t) { return {ObjectiveKind::cobuchi, make_state_set(std::move(t)), {}, {}}; }
    static Objective until(StateSet t1, StateSet t2) {
        return {ObjectiveKind::until, make_state_set(std::move(t1)), make_state_set(std::move(t2)), {}};
    }
    static Objective parity(std::vector<unsigned> prio) { return {ObjectiveKind::parity, {}, {}, std::move(prio)}; }

    friend bool operator==(const Objective&, const Objective&) = default;
};

/// A parsed model file: the POMDP plus optional objective and mode.
struct ModelDocument {
    std::string name = "model";
    Pomdp pomdp;
    std::optional<Objective> objective;
    std::optional<Mode> mode;

    friend bool operator==(const ModelDocument&, const ModelDocument&) = default;
};

struct Violation {
    std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Checks the structural invariants: the observations partition the states,
/// every (state, action) has a distribution with positive weights summing to
/// exactly 1, and referenced ids exist. Empty report means valid.
inline ValidationReport validate(const Pomdp& p) {
    ValidationReport report;
    const std::size_t n = p.num_states();
    if (n == 0) report.push_back({"model has no states"});
    if (p.num_actions() == 0) report.push_back({"model has no actions"});

    std::vector<int> covered(n, 0);
    for (const auto& o : p.observations()) {
        if (o.members.empty()) report.push_back({"observation " + o.name + " is empty"});
        for (StateId s : o.members) {
            if (s >= n) {
                report.push_back({"observation " + o.name + " references unknown state " + std::to_string(s)});
                continue;
            }
            if (++covered[s] == 2)
                report.push_back({"state " + p.state_name(s) + " belongs to more than one observation"});
        }
    }
    for (StateId s = 0; s < n; ++s)
        if (covered[s] == 0) report.push_back({"state " + p.state_name(s) + " not covered by any observation"});

    for (StateId s = 0; s < n; ++s) {
        for (ActionId a = 0; a < p.num_actions(); ++a) {
            const auto& dist = p.transition(s, a);
            const std::string where = "transition " + p.state_name(s) + " " + p.action_name(a);
            if (dist.empty()) {
                report.push_back({where + " is missing"});
                continue;
            }
            Rational sum;
            bool ok = true;
            for (const auto& [t, w] : dist) {
                if (t >= n) {
                    report.push_back({where + " targets unknown state " + std::to_string(t)});
                    ok = false;
                } else if (!w.is_positive()) {
                    report.push_back({where + " has non-positive weight " + w.to_string() + " on " + p.state_name(t)});
                    ok = false;
                }
                sum += w;
            }
            if (ok && sum != Rational(1)) report.push_back({where + ": distribution sums to " + sum.to_string()});
        }
    }
    if (p.initial() && *p.initial() >= n) report.push_back({"initial state out of range"});
    return report;
}

inline void validate_objective(const Pomdp& p, const Objective& obj, ValidationReport& report) {
    auto check = [&](const StateSet& set) {
        for (StateId s : set)
            if (s >= p.num_states()) report.push_back({"objective references unknown state " + std::to_string(s)});
    };
    check(obj.target);
    check(obj.target2);
    if (obj.kind == ObjectiveKind::parity && obj.priority.size() != p.num_states())
        report.push_back({"parity priority map is not total on states"});
}

/// States receiving positive probability from some state of `source` under `action`.
inline StateSet post(const Pomdp& p, const StateSet& source, ActionId action) {
    if (action >= p.num_actions()) throw std::out_of_range("unknown action id " + std::to_string(action));
    std::vector<char> mask(p.num_states(), 0);
    for (StateId s : source)
        for (const auto& [t, w] : p.transition(s, action))
            if (w.is_positive()) mask[t] = 1;
    return from_mask(mask);
}

/// Adjacency lists (sorted) of the graph with an edge l -> l' iff some action
/// moves l to l' with positive probability.
inline std::vector<StateSet> support_graph(const Pomdp& p) {
    std::vector<StateSet> adj(p.num_states());
    for (StateId s = 0; s < p.num_states(); ++s) {
        std::vector<StateId> succ;
        for (ActionId a = 0; a < p.num_actions(); ++a)
            for (const auto& [t, w] : p.transition(s, a))
                if (w.is_positive()) succ.push_back(t);
        adj[s] = make_state_set(std::move(succ));
    }
    return adj;
}

/// Support of the distribution of (s, a).
inline StateSet successors(const Pomdp& p, StateId s, ActionId a) {
    StateSet out;
    for (const auto& [t, w] : p.transition(s, a))
        if (w.is_positive()) out.push_back(t);
    return out;
}

}  // namespace pomdpq
