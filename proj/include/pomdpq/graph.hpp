#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

namespace pomdpq::graph {

using Adjacency = std::vector<std::vector<std::uint32_t>>;

/// Tarjan's algorithm, iterative. Returns the component index of every
/// vertex; components are numbered in reverse topological order (a
/// component only has edges into components with a smaller or equal index).
/// Vertices with active[v] == 0 are ignored and get component -1.
inline std::vector<int> scc_index(const Adjacency& adj, const std::vector<char>* active = nullptr) {
    const std::size_t n = adj.size();
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on_stack(n, 0);
    std::vector<std::uint32_t> stack;
    std::vector<std::pair<std::uint32_t, std::size_t>> call;
    int next_index = 0, next_comp = 0;
    auto is_active = [&](std::uint32_t v) { return active == nullptr || (*active)[v]; };

    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != -1 || !is_active(root)) continue;
        call.push_back({root, 0});
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos < adj[v].size()) {
                std::uint32_t w = adj[v][pos++];
                if (!is_active(w)) continue;
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = next_comp;
                } while (w != v);
                ++next_comp;
            }
            std::uint32_t done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    return comp;
}

/// Groups vertices by component index; each group is sorted.
inline std::vector<std::vector<std::uint32_t>> group_components(const std::vector<int>& comp) {
    int count = 0;
    for (int c : comp) count = std::max(count, c + 1);
    std::vector<std::vector<std::uint32_t>> groups(count);
    for (std::uint32_t v = 0; v < comp.size(); ++v)
        if (comp[v] >= 0) groups[comp[v]].push_back(v);
    return groups;
}

/// Bottom SCCs of the whole graph, each sorted, ordered by smallest member.
inline std::vector<std::vector<std::uint32_t>> bottom_sccs(const Adjacency& adj) {
    auto comp = scc_index(adj);
    auto groups = group_components(comp);
    std::vector<char> bottom(groups.size(), 1);
    for (std::uint32_t v = 0; v < adj.size(); ++v)
        for (std::uint32_t w : adj[v])
            if (comp[w] != comp[v]) bottom[comp[v]] = 0;
    std::vector<std::vector<std::uint32_t>> out;
    for (std::size_t c = 0; c < groups.size(); ++c)
        if (bottom[c]) out.push_back(groups[c]);
    std::sort(out.begin(), out.end());
    return out;
}

/// Vertices reachable from `sources` (forward BFS), as a mask.
inline std::vector<char> reachable_from(const Adjacency& adj, const std::vector<std::uint32_t>& sources) {
    std::vector<char> seen(adj.size(), 0);
    std::deque<std::uint32_t> queue;
    for (auto s : sources)
        if (!seen[s]) {
            seen[s] = 1;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        auto v = queue.front();
        queue.pop_front();
        for (auto w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                queue.push_back(w);
            }
    }
    return seen;
}

inline Adjacency reverse(const Adjacency& adj) {
    Adjacency rev(adj.size());
    for (std::uint32_t v = 0; v < adj.size(); ++v)
        for (auto w : adj[v]) rev[w].push_back(v);
    return rev;
}

}  // namespace pomdpq::graph
