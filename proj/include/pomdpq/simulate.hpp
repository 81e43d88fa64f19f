#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pomdpq/fm_strategy.hpp"
#include "pomdpq/model.hpp"
#include "pomdpq/product.hpp"

namespace pomdpq {

struct SimulationOptions {
    std::uint64_t runs = 1000;
    std::uint64_t steps = 100;
    std::uint64_t seed = 0;
    /// States counted as hits / as staying inside; defaults to the empty set.
    StateSet target;
    unsigned threads = 1;
};

struct SimulationReport {
    std::uint64_t runs = 0;
    std::uint64_t steps = 0;
    std::uint64_t seed = 0;
    std::uint64_t runs_hit = 0;       // visited a target state at some step 0..steps
    std::uint64_t runs_stayed = 0;    // every visited state was a target state
    std::uint64_t runs_hit_late = 0;  // visited a target state in the final quarter
    std::optional<std::uint64_t> first_hit_min;
    std::optional<std::uint64_t> first_hit_max;
    std::vector<std::uint64_t> late_visits;  // per state, summed over runs

    /// Order-independent merge of two partial reports over disjoint runs.
    void merge(const SimulationReport& o) {
        runs += o.runs;
        runs_hit += o.runs_hit;
        runs_stayed += o.runs_stayed;
        runs_hit_late += o.runs_hit_late;
        auto fold = [](std::optional<std::uint64_t>& a, const std::optional<std::uint64_t>& b, bool lo) {
            if (!b) return;
            a = !a ? *b : (lo ? std::min(*a, *b) : std::max(*a, *b));
        };
        fold(first_hit_min, o.first_hit_min, true);
        fold(first_hit_max, o.first_hit_max, false);
        if (late_visits.size() < o.late_visits.size()) late_visits.resize(o.late_visits.size(), 0);
        for (std::size_t i = 0; i < o.late_visits.size(); ++i) late_visits[i] += o.late_visits[i];
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform integer in [0, bound) by rejection; platform independent.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
        std::uint64_t r = rng();
        if (r < limit) return r % bound;
    }
}

/// Index drawn from rational weights summing to 1, by exact cumulative
/// comparison against a uniform draw over the common denominator.
template <class Entry>
std::size_t draw(std::mt19937_64& rng, const std::vector<Entry>& weights) {
    std::uint64_t den = 1;
    for (const auto& e : weights) den = std::lcm(den, static_cast<std::uint64_t>(e.second.den()));
    const std::uint64_t r = uniform_below(rng, den);
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += static_cast<std::uint64_t>(weights[i].second.num()) * (den / static_cast<std::uint64_t>(weights[i].second.den()));
        if (r < acc) return i;
    }
    return weights.size() - 1;
}

inline void simulate_runs(const Pomdp& p, const FiniteMemoryStrategy& s, const StrategyBinding& bind, StateId from,
                          const SimulationOptions& opt, std::uint64_t first, std::uint64_t last,
                          SimulationReport& out) {
    out.late_visits.assign(p.num_states(), 0);
    const std::uint64_t late_from = opt.steps - opt.steps / 4;
    for (std::uint64_t run = first; run < last; ++run) {
        std::mt19937_64 rng(splitmix64(opt.seed ^ splitmix64(run)));
        StateId l = from;
        MemoryId m = s.initial;
        std::optional<std::uint64_t> hit;
        bool stayed = true, late_hit = false;
        for (std::uint64_t t = 0;; ++t) {
            const bool in = contains(opt.target, l);
            if (in && !hit) hit = t;
            stayed = stayed && in;
            if (t >= late_from) {
                ++out.late_visits[l];
                late_hit = late_hit || in;
            }
            if (t == opt.steps) break;
            const auto& dist = s.next(m, bind.strategy_obs(p, l));
            if (!dist) throw StrategyMismatch("next action undefined for memory " + s.memory_labels[m]);
            const ActionId sa = (*dist)[draw(rng, *dist)].first;
            if (sa >= s.actions.size() || bind.action_to_model[sa] < 0)
                throw StrategyMismatch("strategy action not defined by the model");
            const auto& trans = p.transition(l, static_cast<ActionId>(bind.action_to_model[sa]));
            if (trans.empty()) throw StrategyMismatch("transition from " + p.state_name(l) + " is undefined");
            const StateId next = trans[draw(rng, trans)].first;
            const auto& upd = s.update(m, bind.strategy_obs(p, next), sa);
            if (!upd || *upd >= s.memory_size())
                throw StrategyMismatch("memory update undefined for memory " + s.memory_labels[m]);
            l = next;
            m = *upd;
        }
        ++out.runs;
        if (hit) {
            ++out.runs_hit;
            out.first_hit_min = out.first_hit_min ? std::min(*out.first_hit_min, *hit) : *hit;
            out.first_hit_max = out.first_hit_max ? std::max(*out.first_hit_max, *hit) : *hit;
        }
        if (stayed) ++out.runs_stayed;
        if (late_hit) ++out.runs_hit_late;
    }
}

}  // namespace detail

/// Monte Carlo runs of the strategy from `from`. Run r uses its own
/// mt19937_64 stream seeded from (seed, r), so the report does not depend on
/// the thread count.
inline SimulationReport simulate(const Pomdp& p, const FiniteMemoryStrategy& s, StateId from,
                                 const SimulationOptions& opt) {
    if (opt.runs == 0 || opt.steps == 0) throw std::invalid_argument("runs and steps must be at least 1");
    if (from >= p.num_states()) throw std::out_of_range("start state out of range");
    if (s.initial >= s.memory_size()) throw StrategyMismatch("initial memory out of range");
    const detail::StrategyBinding bind(p, s);
    const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(opt.runs)));
    std::vector<SimulationReport> parts(workers);
    auto chunk = [&](unsigned w) {
        const std::uint64_t lo = opt.runs * w / workers, hi = opt.runs * (w + 1) / workers;
        detail::simulate_runs(p, s, bind, from, opt, lo, hi, parts[w]);
    };
    if (workers == 1) {
        chunk(0);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    chunk(w);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    SimulationReport r;
    r.steps = opt.steps;
    r.seed = opt.seed;
    r.late_visits.assign(p.num_states(), 0);
    for (const auto& part : parts) r.merge(part);
    return r;
}

/// Aligned human-readable report.
inline std::string format_report_text(const Pomdp& p, const SimulationReport& r) {
    std::ostringstream os;
    auto row = [&](const std::string& k, const std::string& v) { os << std::left << std::setw(22) << k << v << "\n"; };
    row("runs", std::to_string(r.runs));
    row("steps per run", std::to_string(r.steps));
    row("seed", std::to_string(r.seed));
    row("runs hitting target", std::to_string(r.runs_hit) + "/" + std::to_string(r.runs));
    row("runs inside target", std::to_string(r.runs_stayed) + "/" + std::to_string(r.runs));
    row("late target runs", std::to_string(r.runs_hit_late) + "/" + std::to_string(r.runs));
    row("first hit step", r.first_hit_min ? std::to_string(*r.first_hit_min) + ".." + std::to_string(*r.first_hit_max)
                                          : std::string("-"));
    os << "final-quarter visits:\n";
    std::size_t width = 0;
    for (const auto& n : p.state_names()) width = std::max(width, n.size());
    for (StateId l = 0; l < p.num_states(); ++l)
        os << "  " << std::left << std::setw(static_cast<int>(width) + 2) << p.state_name(l) << r.late_visits[l] << "\n";
    return os.str();
}

/// One key=value pair per line.
inline std::string format_report_kv(const Pomdp& p, const SimulationReport& r) {
    std::ostringstream os;
    os << "runs=" << r.runs << "\nsteps=" << r.steps << "\nseed=" << r.seed << "\nruns_hit=" << r.runs_hit
       << "\nruns_stayed=" << r.runs_stayed << "\nruns_hit_late=" << r.runs_hit_late << "\n";
    if (r.first_hit_min) os << "first_hit_min=" << *r.first_hit_min << "\nfirst_hit_max=" << *r.first_hit_max << "\n";
    for (StateId l = 0; l < p.num_states(); ++l) os << "late_visits." << p.state_name(l) << "=" << r.late_visits[l] << "\n";
    return os.str();
}

}  // namespace pomdpq
