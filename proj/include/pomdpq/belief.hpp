#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pomdpq/mdp.hpp"
#include "pomdpq/model.hpp"

namespace pomdpq {

/// Nonempty sorted set of states sharing one observation.
using Cell = StateSet;
using CellId = std::uint32_t;

/// "{a,b}" using state names.
inline std::string cell_label(const Pomdp& p, const Cell& c) {
    std::string out = "{";
    for (std::size_t i = 0; i < c.size(); ++i) out += (i ? "," : "") + p.state_name(c[i]);
    return out + "}";
}

/// Cell name that is a valid identifier in the model text format: "[a|b]".
inline std::string cell_identifier(const Pomdp& p, const Cell& c) {
    std::string out = "[";
    for (std::size_t i = 0; i < c.size(); ++i) out += (i ? "|" : "") + p.state_name(c[i]);
    return out + "]";
}

namespace detail {

class CellTable {
public:
    CellId intern(const Cell& c) {
        auto [it, fresh] = index_.try_emplace(c, static_cast<CellId>(cells_.size()));
        if (fresh) cells_.push_back(c);
        return it->second;
    }
    std::optional<CellId> find(const Cell& c) const {
        auto it = index_.find(c);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    const std::vector<Cell>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }

private:
    std::map<Cell, CellId> index_;
    std::vector<Cell> cells_;
};

/// post(cell, a) split by observation, in observation id order.
inline std::vector<std::pair<ObsId, Cell>> split_post(const Pomdp& p, const Cell& cell, ActionId a) {
    std::vector<std::pair<ObsId, Cell>> out;
    for (StateId t : post(p, cell, a)) {
        ObsId o = p.obs(t);
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == o; });
        if (it == out.end())
            out.push_back({o, {t}});
        else
            it->second.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

/// Reachable fragment of the knowledge-based subset construction for a safe
/// set T: from cell s under action a, the successors are the nonempty sets
/// post(s, a) ∩ o ∩ T and (post(s, a) ∩ o) \ T over observations o.
struct KnowledgeGame {
    std::vector<Cell> cells;
    std::size_t num_actions = 0;
    /// Sorted successor cell ids, indexed by cell * num_actions + action.
    std::vector<std::vector<CellId>> edges;
    /// safe[c] iff cells[c] ⊆ T.
    std::vector<char> safe;
    CellId initial = 0;

    const std::vector<CellId>& successors(CellId c, ActionId a) const { return edges[c * num_actions + a]; }
    std::optional<CellId> find(const Cell& c) const {
        auto it = std::find(cells.begin(), cells.end(), c);
        if (it == cells.end()) return std::nullopt;
        return static_cast<CellId>(it - cells.begin());
    }
};

/// Builds the knowledge game reachable from all `seeds`; `initial` is the
/// first seed.
inline KnowledgeGame knowledge_game(const Pomdp& p, const StateSet& target, std::span<const Cell> seeds) {
    detail::CellTable table;
    for (const auto& s : seeds) table.intern(s);
    KnowledgeGame g;
    g.num_actions = p.num_actions();
    for (CellId c = 0; c < table.size(); ++c) {
        const Cell cell = table.cells()[c];
        for (ActionId a = 0; a < p.num_actions(); ++a) {
            std::vector<CellId> succ;
            for (auto& [o, part] : detail::split_post(p, cell, a)) {
                Cell in, out;
                for (StateId t : part) (contains(target, t) ? in : out).push_back(t);
                if (!in.empty()) succ.push_back(table.intern(in));
                if (!out.empty()) succ.push_back(table.intern(out));
            }
            std::sort(succ.begin(), succ.end());
            g.edges.push_back(std::move(succ));
        }
    }
    g.cells = table.cells();
    g.safe.resize(g.cells.size());
    for (CellId c = 0; c < g.cells.size(); ++c)
        g.safe[c] = std::all_of(g.cells[c].begin(), g.cells[c].end(), [&](StateId s) { return contains(target, s); });
    return g;
}

inline KnowledgeGame knowledge_game(const Pomdp& p, const StateSet& target, StateId from) {
    const Cell seed{from};
    return knowledge_game(p, target, std::span<const Cell>(&seed, 1));
}

/// Winning cells of the safety game on a knowledge game, with one witness
/// action per winning cell.
struct SureSafeCells {
    std::vector<char> winning;              // per cell of the game
    std::vector<std::optional<ActionId>> action;

    bool wins(CellId c) const { return winning.at(c) != 0; }
    std::vector<CellId> ids() const {
        std::vector<CellId> out;
        for (CellId c = 0; c < winning.size(); ++c)
            if (winning[c]) out.push_back(c);
        return out;
    }
};

/// Greatest fixpoint: safe cells having an action whose successor cells all
/// stay in the set. Ties go to the smallest action id.
inline SureSafeCells sure_safe_cells(const KnowledgeGame& g) {
    const std::size_t n = g.cells.size();
    std::vector<char> win = g.safe;
    auto good_action = [&](CellId c, ActionId a) {
        const auto& succ = g.successors(c, a);
        return std::all_of(succ.begin(), succ.end(), [&](CellId d) { return win[d] != 0; });
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (CellId c = 0; c < n; ++c) {
            if (!win[c]) continue;
            bool ok = false;
            for (ActionId a = 0; a < g.num_actions && !ok; ++a) ok = good_action(c, a);
            if (!ok) {
                win[c] = 0;
                changed = true;
            }
        }
    }
    SureSafeCells out{win, std::vector<std::optional<ActionId>>(n)};
    for (CellId c = 0; c < n; ++c) {
        if (!win[c]) continue;
        for (ActionId a = 0; a < g.num_actions; ++a)
            if (good_action(c, a)) {
                out.action[c] = a;
                break;
            }
    }
    return out;
}

/// Maximal elements under inclusion, sorted.
inline std::vector<Cell> antichain_prune(std::span<const Cell> cells) {
    std::vector<Cell> out;
    for (const auto& c : cells) {
        bool dominated = std::any_of(cells.begin(), cells.end(), [&](const Cell& d) {
            return d.size() > c.size() && std::includes(d.begin(), d.end(), c.begin(), c.end());
        });
        if (!dominated) out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// All nonempty subsets of the given cells, sorted.
inline std::vector<Cell> downward_closure(std::span<const Cell> cells) {
    std::vector<Cell> out;
    for (const auto& c : cells) {
        if (c.size() >= 24) throw std::length_error("cell too large for explicit downward closure");
        for (std::uint32_t bits = 1; bits < (1u << c.size()); ++bits) {
            Cell sub;
            for (std::size_t i = 0; i < c.size(); ++i)
                if (bits & (1u << i)) sub.push_back(c[i]);
            out.push_back(std::move(sub));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Belief supports reachable from the seeds: from cell s under action a the
/// successors are the nonempty sets post(s, a) ∩ o, one per observation o.
struct BeliefGraph {
    std::vector<Cell> cells;
    std::size_t num_actions = 0;
    /// (observation, successor cell) pairs sorted by observation, indexed by
    /// cell * num_actions + action.
    std::vector<std::vector<std::pair<ObsId, CellId>>> edges;

    const std::vector<std::pair<ObsId, CellId>>& successors(CellId c, ActionId a) const {
        return edges[c * num_actions + a];
    }
    std::optional<CellId> successor(CellId c, ActionId a, ObsId o) const {
        for (auto [obs, d] : successors(c, a))
            if (obs == o) return d;
        return std::nullopt;
    }
    std::optional<CellId> find(const Cell& c) const {
        auto it = std::find(cells.begin(), cells.end(), c);
        if (it == cells.end()) return std::nullopt;
        return static_cast<CellId>(it - cells.begin());
    }
};

inline BeliefGraph belief_graph(const Pomdp& p, std::span<const Cell> seeds) {
    detail::CellTable table;
    for (const auto& s : seeds) table.intern(s);
    BeliefGraph g;
    g.num_actions = p.num_actions();
    for (CellId c = 0; c < table.size(); ++c) {
        const Cell cell = table.cells()[c];
        for (ActionId a = 0; a < p.num_actions(); ++a) {
            std::vector<std::pair<ObsId, CellId>> succ;
            for (auto& [o, part] : detail::split_post(p, cell, a)) succ.push_back({o, table.intern(part)});
            g.edges.push_back(std::move(succ));
        }
    }
    g.cells = table.cells();
    return g;
}

/// Belief-support MDP: states are cells, successor cells weighted uniformly.
struct BeliefMdp {
    Mdp mdp;
    std::vector<Cell> cells;
    CellId initial = 0;
};

inline BeliefMdp belief_mdp(const Pomdp& p, StateId from) {
    const Cell seed{from};
    auto g = belief_graph(p, std::span<const Cell>(&seed, 1));
    PomdpBuilder b;
    for (const auto& c : g.cells) b.add_state(cell_identifier(p, c));
    for (const auto& a : p.action_names()) b.add_action(a);
    for (CellId c = 0; c < g.cells.size(); ++c) {
        b.add_observation(cell_identifier(p, g.cells[c]), {c});
        for (ActionId a = 0; a < p.num_actions(); ++a) {
            const auto& succ = g.successors(c, a);
            for (auto [o, d] : succ) b.add_transition(c, a, d, Rational(1, static_cast<std::int64_t>(succ.size())));
        }
    }
    b.set_initial(0);
    return BeliefMdp{Mdp(b.build()), g.cells, 0};
}

/// Cells contained in T (lifting for safety).
inline StateSet lift_subset(const BeliefMdp& bm, const StateSet& target) {
    StateSet out;
    for (CellId c = 0; c < bm.cells.size(); ++c)
        if (std::includes(target.begin(), target.end(), bm.cells[c].begin(), bm.cells[c].end())) out.push_back(c);
    return out;
}

/// Cells meeting T (lifting for reachability and Büchi).
inline StateSet lift_meets(const BeliefMdp& bm, const StateSet& target) {
    StateSet out;
    for (CellId c = 0; c < bm.cells.size(); ++c)
        if (std::any_of(bm.cells[c].begin(), bm.cells[c].end(), [&](StateId s) { return contains(target, s); }))
            out.push_back(c);
    return out;
}

}  // namespace pomdpq
