#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pomdpq/fm_strategy.hpp"
#include "pomdpq/format.hpp"
#include "pomdpq/model.hpp"
#include "pomdpq/simulate.hpp"

namespace pomdpq {

inline std::vector<unsigned> first_primes(std::size_t n) {
    std::vector<unsigned> out;
    for (unsigned c = 2; out.size() < n; ++c)
        if (std::none_of(out.begin(), out.end(), [&](unsigned p) { return c % p == 0; })) out.push_back(c);
    return out;
}

/// Product of the first n primes (their lcm).
inline std::uint64_t primorial(std::size_t n) {
    std::uint64_t r = 1;
    for (unsigned p : first_primes(n)) r *= p;
    return r;
}

/// Four states 0..3, one action: 0 -> 1 | 2, 1 -> 1 | 3, 2 and 3 absorbing;
/// observations o1 = {0,1,2}, o2 = {3}.
inline ModelDocument gen_example1() {
    PomdpBuilder b;
    for (const char* s : {"0", "1", "2", "3"}) b.add_state(s);
    b.add_action("a");
    b.add_observation("o1", {0, 1, 2});
    b.add_observation("o2", {3});
    const Rational half(1, 2);
    b.add_transition(0, 0, 1, half);
    b.add_transition(0, 0, 2, half);
    b.add_transition(1, 0, 1, half);
    b.add_transition(1, 0, 3, half);
    b.add_transition(2, 0, 2, Rational(1));
    b.add_transition(3, 0, 3, Rational(1));
    b.set_initial(0);
    return {"example1", b.build(), Objective::safe({0, 1, 2}), Mode::positive};
}

inline std::string loop_state_name(std::size_t i, std::size_t j) {
    return "q" + std::to_string(i) + "_" + std::to_string(j);
}

/// Safety family: from q0 every numbered action enters loop i (of length
/// p_i, the i-th prime) with probability 1/n. Inside a loop numbered actions advance or
/// fall back to q0 with probability 1/2 each; at the last loop state action
/// i leads to Bad and "hash" returns to q0. Elsewhere "hash" leads to Bad.
/// Objective: almost-sure Safe(all but Bad).
inline ModelDocument gen_safety_family(std::size_t n) {
    if (n < 1) throw std::invalid_argument("family index must be at least 1");
    const auto primes = first_primes(n);
    PomdpBuilder b;
    const StateId q0 = b.add_state("q0");
    std::vector<std::vector<StateId>> loop(n);
    for (std::size_t i = 0; i < n; ++i)
        for (unsigned j = 1; j <= primes[i]; ++j) loop[i].push_back(b.add_state(loop_state_name(i + 1, j)));
    const StateId bad = b.add_state("Bad");
    for (std::size_t i = 1; i <= n; ++i) b.add_action(std::to_string(i));
    const ActionId hash = b.add_action("hash");

    std::vector<StateId> loops;
    for (const auto& l : loop) loops.insert(loops.end(), l.begin(), l.end());
    b.add_observation("o1", {q0});
    b.add_observation("o2", loops);
    b.add_observation("o_bad", {bad});

    const Rational half(1, 2);
    for (ActionId a = 0; a < n; ++a)
        for (std::size_t i = 0; i < n; ++i) b.add_transition(q0, a, loop[i][0], Rational(1, static_cast<std::int64_t>(n)));
    b.add_transition(q0, hash, bad, Rational(1));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = primes[i];
        for (std::size_t j = 0; j < p; ++j) {
            const StateId s = loop[i][j];
            const bool last = j + 1 == p;
            for (ActionId a = 0; a < n; ++a) {
                if (last && a == i) {
                    b.add_transition(s, a, bad, Rational(1));
                } else {
                    b.add_transition(s, a, last ? loop[i][0] : loop[i][j + 1], half);
                    b.add_transition(s, a, q0, half);
                }
            }
            b.add_transition(s, hash, last ? q0 : bad, Rational(1));
        }
    }
    for (ActionId a = 0; a <= n; ++a) b.add_transition(bad, a, bad, Rational(1));
    b.set_initial(q0);
    std::vector<StateId> safe;
    for (StateId s = 0; s < bad; ++s) safe.push_back(s);
    return {"safety_family_" + std::to_string(n), b.build(), Objective::safe(safe), Mode::almost_sure};
}

/// Reachability family: a single observation; from q0 any action enters loop i with
/// probability 1/n; "tick" moves one step around the loop; "hash" at the
/// last loop state leads to Goal and anywhere else in a loop to sink.
/// Objective: almost-sure Reach({Goal}).
inline ModelDocument gen_reach_family(std::size_t n) {
    if (n < 1) throw std::invalid_argument("family index must be at least 1");
    const auto primes = first_primes(n);
    PomdpBuilder b;
    const StateId q0 = b.add_state("q0");
    std::vector<std::vector<StateId>> loop(n);
    for (std::size_t i = 0; i < n; ++i)
        for (unsigned j = 1; j <= primes[i]; ++j) loop[i].push_back(b.add_state(loop_state_name(i + 1, j)));
    const StateId goal = b.add_state("Goal");
    const StateId sink = b.add_state("sink");
    const ActionId tick = b.add_action("tick");
    const ActionId hash = b.add_action("hash");
    std::vector<StateId> all(b.num_states());
    std::iota(all.begin(), all.end(), 0);
    b.add_observation("o", all);

    for (ActionId a : {tick, hash})
        for (std::size_t i = 0; i < n; ++i) b.add_transition(q0, a, loop[i][0], Rational(1, static_cast<std::int64_t>(n)));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = primes[i];
        for (std::size_t j = 0; j < p; ++j) {
            const bool last = j + 1 == p;
            b.add_transition(loop[i][j], tick, loop[i][(j + 1) % p], Rational(1));
            b.add_transition(loop[i][j], hash, last ? goal : sink, Rational(1));
        }
    }
    for (ActionId a : {tick, hash}) {
        b.add_transition(goal, a, goal, Rational(1));
        b.add_transition(sink, a, sink, Rational(1));
    }
    b.set_initial(q0);
    return {"reach_family_" + std::to_string(n), b.build(), Objective::reach({goal}), Mode::almost_sure};
}

/// Counter strategy for the reachability family: "tick" while fewer than
/// `period` steps were taken, then "hash". Memory: counts 0..period,
/// saturating.
inline FiniteMemoryStrategy reach_family_counter(const Pomdp& p, std::uint64_t period) {
    const ActionId tick = *p.find_action("tick"), hash = *p.find_action("hash");
    auto s = FiniteMemoryStrategy::for_model(p, period + 1);
    s.name = "counter";
    for (MemoryId j = 0; j <= period; ++j) {
        s.memory_labels[j] = "count " + std::to_string(j);
        for (ObsId o = 0; o < p.num_observations(); ++o) s.next(j, o) = pure(j < period ? tick : hash);
        s.set_update_all(j, static_cast<MemoryId>(std::min<std::uint64_t>(j + 1, period)));
    }
    return s;
}

/// Small counter strategies for the reachability family, each with fewer
/// than `period` memory states: saturating counters playing "hash" from
/// count k-1 on, cyclic counters modulo k playing "hash" at one residue, and
/// "tick" forever.
inline std::vector<FiniteMemoryStrategy> reach_family_small_counters(const Pomdp& p, std::uint64_t period) {
    const ActionId tick = *p.find_action("tick"), hash = *p.find_action("hash");
    std::vector<FiniteMemoryStrategy> pool;
    auto always_tick = FiniteMemoryStrategy::for_model(p, 1);
    always_tick.name = "tick-forever";
    for (ObsId o = 0; o < p.num_observations(); ++o) always_tick.next(0, o) = pure(tick);
    always_tick.set_update_all(0, 0);
    pool.push_back(always_tick);
    for (std::uint64_t k = 1; k < period; ++k) {
        auto sat = FiniteMemoryStrategy::for_model(p, k);
        sat.name = "saturating-" + std::to_string(k);
        for (MemoryId j = 0; j < k; ++j) {
            for (ObsId o = 0; o < p.num_observations(); ++o) sat.next(j, o) = pure(j + 1 < k ? tick : hash);
            sat.set_update_all(j, static_cast<MemoryId>(std::min<std::uint64_t>(j + 1, k - 1)));
        }
        pool.push_back(sat);
        for (std::uint64_t r = 0; r < k; ++r) {
            auto cyc = FiniteMemoryStrategy::for_model(p, k);
            cyc.name = "cyclic-" + std::to_string(k) + "-" + std::to_string(r);
            for (MemoryId j = 0; j < k; ++j) {
                for (ObsId o = 0; o < p.num_observations(); ++o) cyc.next(j, o) = pure(j == r ? hash : tick);
                cyc.set_update_all(j, static_cast<MemoryId>((j + 1) % k));
            }
            pool.push_back(cyc);
        }
    }
    return pool;
}

/// Counter strategy for the safety family: count consecutive loop observations; at count j
/// play the smallest action i with j mod p_i != 0, and "hash" when every
/// loop is at its last state (j = product of the loop lengths). Observing q0 resets the count.
inline FiniteMemoryStrategy safety_family_counter(const Pomdp& p, std::size_t n) {
    const auto primes = first_primes(n);
    const std::uint64_t period = primorial(n);
    const ObsId o2 = *p.find_observation("o2");
    const ActionId hash = *p.find_action("hash");
    auto s = FiniteMemoryStrategy::for_model(p, period + 1);
    s.name = "counter";
    for (MemoryId j = 0; j <= period; ++j) {
        s.memory_labels[j] = "count " + std::to_string(j);
        std::optional<ActionId> act;
        for (std::size_t i = 0; i < n && !act; ++i)
            if (j % primes[i] != 0) act = static_cast<ActionId>(i);
        for (ObsId o = 0; o < p.num_observations(); ++o) {
            s.next(j, o) = pure(o == o2 ? act.value_or(hash) : 0);
            for (ActionId a = 0; a < p.num_actions(); ++a)
                s.update(j, o, a) = o == o2 ? static_cast<MemoryId>(std::min<std::uint64_t>(j + 1, period)) : 0;
        }
    }
    return s;
}

/// Boolean circuit with AND/OR gates over constant inputs. Gate 0 is the
/// output.
struct Circuit {
    struct Ref {
        bool is_gate = false;
        std::uint32_t index = 0;
        friend bool operator==(const Ref&, const Ref&) = default;
    };
    struct Gate {
        std::string name;
        bool is_and = false;
        Ref left, right;
    };
    struct Input {
        std::string name;
        bool value = false;
    };
    std::vector<Gate> gates;
    std::vector<Input> inputs;
};

/// Throws std::invalid_argument unless every reference resolves, the gate
/// graph is acyclic and there is at least one gate.
inline void check_circuit(const Circuit& c) {
    if (c.gates.empty()) throw std::invalid_argument("circuit has no gates");
    auto ok = [&](const Circuit::Ref& r) { return r.is_gate ? r.index < c.gates.size() : r.index < c.inputs.size(); };
    for (const auto& g : c.gates)
        if (!ok(g.left) || !ok(g.right)) throw std::invalid_argument("gate " + g.name + " has a dangling reference");
    std::vector<int> state(c.gates.size(), 0);
    std::function<void(std::uint32_t)> visit = [&](std::uint32_t g) {
        if (state[g] == 2) return;
        if (state[g] == 1) throw std::invalid_argument("circuit has a cycle through gate " + c.gates[g].name);
        state[g] = 1;
        for (const auto& r : {c.gates[g].left, c.gates[g].right})
            if (r.is_gate) visit(r.index);
        state[g] = 2;
    };
    for (std::uint32_t g = 0; g < c.gates.size(); ++g) visit(g);
}

/// Value of the output gate, by memoized depth-first evaluation.
inline bool eval_circuit(const Circuit& c) {
    check_circuit(c);
    std::vector<int> memo(c.gates.size(), -1);
    std::function<bool(const Circuit::Ref&)> value = [&](const Circuit::Ref& r) -> bool {
        if (!r.is_gate) return c.inputs[r.index].value;
        int& m = memo[r.index];
        if (m < 0) {
            const auto& g = c.gates[r.index];
            const bool l = value(g.left), rr = value(g.right);
            m = g.is_and ? (l && rr) : (l || rr);
        }
        return m != 0;
    };
    return value({true, 0});
}

/// Lines `gate ID and|or REF REF` and `input ID 0|1`; '#' comments. The first
/// declared gate is the output. References may point forward.
inline Circuit parse_circuit(std::string_view input) {
    const auto lines = text::tokenize(input);
    Circuit c;
    std::map<std::string, Circuit::Ref> names;
    std::vector<std::pair<const text::Token*, const text::Token*>> refs;
    for (const auto& line : lines) {
        text::Cursor cur(line);
        const auto& kw = cur.ident("'gate' or 'input'");
        const auto& id = cur.ident("name");
        if (names.count(id.text)) throw ParseError(id.line, id.column, "duplicate name '" + id.text + "'");
        if (kw.text == "gate") {
            const auto& op = cur.ident("'and' or 'or'");
            if (op.text != "and" && op.text != "or")
                throw ParseError(op.line, op.column, "expected 'and' or 'or', found '" + op.text + "'");
            const auto& l = cur.ident("input reference");
            const auto& r = cur.ident("input reference");
            names[id.text] = {true, static_cast<std::uint32_t>(c.gates.size())};
            c.gates.push_back({id.text, op.text == "and", {}, {}});
            refs.push_back({&l, &r});
        } else if (kw.text == "input") {
            const auto& v = cur.ident("0 or 1");
            if (v.text != "0" && v.text != "1") throw ParseError(v.line, v.column, "expected 0 or 1, found '" + v.text + "'");
            names[id.text] = {false, static_cast<std::uint32_t>(c.inputs.size())};
            c.inputs.push_back({id.text, v.text == "1"});
        } else {
            throw ParseError(kw.line, kw.column, "expected 'gate' or 'input', found '" + kw.text + "'");
        }
        cur.end();
    }
    if (c.gates.empty()) throw ParseError(lines.empty() ? 1 : lines.back().number, 1, "circuit has no gates");
    auto resolve = [&](const text::Token* t) {
        auto it = names.find(t->text);
        if (it == names.end()) throw ParseError(t->line, t->column, "unknown reference '" + t->text + "'");
        return it->second;
    };
    for (std::size_t g = 0; g < c.gates.size(); ++g) {
        c.gates[g].left = resolve(refs[g].first);
        c.gates[g].right = resolve(refs[g].second);
    }
    try {
        check_circuit(c);
    } catch (const std::invalid_argument& e) {
        throw ParseError(lines.front().number, 1, e.what());
    }
    return c;
}

inline std::string serialize_circuit(const Circuit& c) {
    auto name = [&](const Circuit::Ref& r) { return r.is_gate ? c.gates[r.index].name : c.inputs[r.index].name; };
    std::string out;
    for (const auto& g : c.gates)
        out += "gate " + g.name + (g.is_and ? " and " : " or ") + name(g.left) + " " + name(g.right) + "\n";
    for (const auto& i : c.inputs) out += "input " + i.name + (i.value ? " 1\n" : " 0\n");
    return out;
}

namespace detail {

/// Shared layout of both CVP reductions: gates first, then inputs; actions
/// l and r; perfect observation. `true_input_to_output` sends true inputs
/// back to the output gate instead of making them absorbing.
inline Pomdp cvp_mdp(const Circuit& c, bool true_input_to_output) {
    check_circuit(c);
    PomdpBuilder b;
    for (const auto& g : c.gates) b.add_state(g.name);
    for (const auto& i : c.inputs) b.add_state(i.name);
    const ActionId l = b.add_action("l"), r = b.add_action("r");
    for (StateId s = 0; s < b.num_states(); ++s) b.add_observation("o_" + std::to_string(s), {s});
    const auto gates = static_cast<StateId>(c.gates.size());
    auto state_of = [&](const Circuit::Ref& ref) { return ref.is_gate ? ref.index : gates + ref.index; };
    for (StateId g = 0; g < gates; ++g) {
        const auto& gate = c.gates[g];
        if (gate.is_and) {
            for (ActionId a : {l, r}) {
                b.add_transition(g, a, state_of(gate.left), Rational(1, 2));
                b.add_transition(g, a, state_of(gate.right), Rational(1, 2));
            }
        } else {
            b.add_transition(g, l, state_of(gate.left), Rational(1));
            b.add_transition(g, r, state_of(gate.right), Rational(1));
        }
    }
    for (StateId i = 0; i < c.inputs.size(); ++i)
        for (ActionId a : {l, r})
            b.add_transition(gates + i, a, true_input_to_output && c.inputs[i].value ? 0 : gates + i, Rational(1));
    b.set_initial(0);
    return b.build();
}

}  // namespace detail

/// Almost-sure Reach(I1) from the output gate holds iff the circuit is true.
inline ModelDocument gen_cvp_reach(const Circuit& c) {
    auto p = detail::cvp_mdp(c, false);
    std::vector<StateId> t;
    for (StateId i = 0; i < c.inputs.size(); ++i)
        if (c.inputs[i].value) t.push_back(static_cast<StateId>(c.gates.size()) + i);
    return {"cvp_reach", std::move(p), Objective::reach(t), Mode::almost_sure};
}

/// Positive Safe(N ∪ I1) from the output gate holds iff the circuit is true.
inline ModelDocument gen_cvp_safety(const Circuit& c) {
    auto p = detail::cvp_mdp(c, true);
    std::vector<StateId> t;
    for (StateId g = 0; g < c.gates.size(); ++g) t.push_back(g);
    for (StateId i = 0; i < c.inputs.size(); ++i)
        if (c.inputs[i].value) t.push_back(static_cast<StateId>(c.gates.size()) + i);
    return {"cvp_safety", std::move(p), Objective::safe(t), Mode::positive};
}

/// Random acyclic circuit: gate k only references later gates or inputs.
inline Circuit random_circuit(std::mt19937_64& rng, std::size_t max_gates) {
    Circuit c;
    const std::size_t gates = 1 + detail::uniform_below(rng, max_gates);
    const std::size_t inputs = 1 + detail::uniform_below(rng, 4);
    for (std::size_t i = 0; i < inputs; ++i) c.inputs.push_back({"x" + std::to_string(i), detail::uniform_below(rng, 2) == 1});
    for (std::size_t g = 0; g < gates; ++g) c.gates.push_back({"g" + std::to_string(g), detail::uniform_below(rng, 2) == 1, {}, {}});
    auto pick = [&](std::size_t g) {
        const std::size_t later = gates - g - 1;
        const std::size_t k = detail::uniform_below(rng, later + inputs);
        return k < later ? Circuit::Ref{true, static_cast<std::uint32_t>(g + 1 + k)}
                         : Circuit::Ref{false, static_cast<std::uint32_t>(k - later)};
    };
    for (std::size_t g = 0; g < gates; ++g) {
        c.gates[g].left = pick(g);
        c.gates[g].right = pick(g);
    }
    return c;
}

/// Random valid POMDP: observations are nonempty (when states allow), and
/// each (state, action) gets a random nonempty support with weights drawn
/// from {1, 2, 3} and normalized.
inline Pomdp random_pomdp(std::mt19937_64& rng, std::size_t states, std::size_t actions, std::size_t observations) {
    observations = std::max<std::size_t>(1, std::min(observations, states));
    PomdpBuilder b;
    for (std::size_t s = 0; s < states; ++s) b.add_state("s" + std::to_string(s));
    for (std::size_t a = 0; a < actions; ++a) b.add_action("a" + std::to_string(a));
    std::vector<std::vector<StateId>> members(observations);
    std::vector<StateId> order(states);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = states; i > 1; --i) std::swap(order[i - 1], order[detail::uniform_below(rng, i)]);
    for (std::size_t i = 0; i < states; ++i)
        members[i < observations ? i : detail::uniform_below(rng, observations)].push_back(order[i]);
    for (std::size_t o = 0; o < observations; ++o) b.add_observation("z" + std::to_string(o), members[o]);
    for (StateId s = 0; s < states; ++s)
        for (ActionId a = 0; a < actions; ++a) {
            std::vector<std::int64_t> w(states, 0);
            std::int64_t total = 0;
            while (total == 0)
                for (std::size_t t = 0; t < states; ++t) {
                    w[t] = detail::uniform_below(rng, 2 * states) < 3 ? 1 + static_cast<std::int64_t>(detail::uniform_below(rng, 3)) : 0;
                    total += w[t];
                }
            for (StateId t = 0; t < states; ++t)
                if (w[t]) b.add_transition(s, a, t, Rational(w[t], total));
        }
    b.set_initial(0);
    return b.build();
}

}  // namespace pomdpq
