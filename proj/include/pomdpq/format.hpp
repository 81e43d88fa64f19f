#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pomdpq/fm_strategy.hpp"
#include "pomdpq/model.hpp"
#include "pomdpq/rational.hpp"

namespace pomdpq {

/// Syntax or semantic error at a 1-based line/column.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
          line_(line),
          column_(column),
          message_(message) {}

    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& message() const { return message_; }

private:
    int line_;
    int column_;
    std::string message_;
};

namespace text {

struct Token {
    std::string text;
    int line = 0;
    int column = 0;
};

struct Line {
    int number = 0;
    std::string raw;  // without the comment
    std::vector<Token> tokens;
};

inline bool is_punct(std::string_view t) { return t == "{" || t == "}" || t == "," || t == ":" || t == "->"; }

/// True if `name` survives the lexer as a single identifier token.
inline bool is_identifier(std::string_view name) {
    if (name.empty() || name.find("->") != std::string_view::npos) return false;
    return std::none_of(name.begin(), name.end(), [](char c) {
        return c == '{' || c == '}' || c == ',' || c == ':' || c == '#' || c == ' ' || c == '\t' || c == '\n' ||
               c == '\r';
    });
}

/// Splits into lines; '#' starts a comment. Inside each whitespace-separated
/// chunk, '{', '}', ',', ':' and "->" are tokens of their own.
inline std::vector<Line> tokenize(std::string_view input) {
    std::vector<Line> lines;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= input.size()) {
        std::size_t end = input.find('\n', pos);
        if (end == std::string_view::npos) end = input.size();
        std::string_view raw = input.substr(pos, end - pos);
        ++number;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        Line line{number, std::string(raw), {}};
        std::size_t i = 0;
        while (i < raw.size()) {
            if (std::isspace(static_cast<unsigned char>(raw[i]))) {
                ++i;
                continue;
            }
            const int col = static_cast<int>(i) + 1;
            if (raw[i] == '{' || raw[i] == '}' || raw[i] == ',' || raw[i] == ':') {
                line.tokens.push_back({std::string(1, raw[i]), number, col});
                ++i;
                continue;
            }
            if (raw.substr(i, 2) == "->") {
                line.tokens.push_back({"->", number, col});
                i += 2;
                continue;
            }
            std::size_t j = i;
            while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j])) && raw[j] != '{' &&
                   raw[j] != '}' && raw[j] != ',' && raw[j] != ':' && raw.substr(j, 2) != "->")
                ++j;
            line.tokens.push_back({std::string(raw.substr(i, j - i)), number, col});
            i = j;
        }
        if (!line.tokens.empty()) lines.push_back(std::move(line));
        if (end == input.size()) break;
        pos = end + 1;
    }
    return lines;
}

/// Sequential reader over one line's tokens.
class Cursor {
public:
    explicit Cursor(const Line& line) : line_(line) {}

    bool done() const { return i_ >= line_.tokens.size(); }
    const Token* peek() const { return done() ? nullptr : &line_.tokens[i_]; }
    bool peek_is(std::string_view t) const { return !done() && line_.tokens[i_].text == t; }

    [[noreturn]] void fail(const std::string& msg) const {
        if (done()) throw ParseError(line_.number, static_cast<int>(line_.raw.size()) + 1, msg);
        throw ParseError(line_.tokens[i_].line, line_.tokens[i_].column, msg);
    }

    const Token& expect(std::string_view t) {
        if (!peek_is(t)) fail("expected '" + std::string(t) + "'" + found());
        return line_.tokens[i_++];
    }
    const Token& ident(std::string_view what) {
        if (done() || is_punct(line_.tokens[i_].text)) fail("expected " + std::string(what) + found());
        return line_.tokens[i_++];
    }
    void end() {
        if (!done()) fail("unexpected '" + line_.tokens[i_].text + "'");
    }
    std::size_t position() const { return i_; }

private:
    std::string found() const { return done() ? " at end of line" : ", found '" + line_.tokens[i_].text + "'"; }

    const Line& line_;
    std::size_t i_ = 0;
};

inline std::uint64_t parse_count(const Token& t, const char* what) {
    std::uint64_t v = 0;
    if (t.text.empty() || t.text.size() > 9 ||
        !std::all_of(t.text.begin(), t.text.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw ParseError(t.line, t.column, std::string("expected ") + what + ", found '" + t.text + "'");
    for (char c : t.text) v = v * 10 + static_cast<unsigned>(c - '0');
    return v;
}

inline Rational parse_weight(const Token& t) {
    Rational r;
    if (!Rational::parse(t.text, r)) throw ParseError(t.line, t.column, "malformed probability '" + t.text + "'");
    return r;
}

}  // namespace text

namespace detail {

/// Resolves names against a partially built model.
struct ModelScope {
    std::map<std::string, StateId> states;
    std::map<std::string, ActionId> actions;

    StateId state(const text::Token& t) const {
        auto it = states.find(t.text);
        if (it == states.end()) throw ParseError(t.line, t.column, "unknown state '" + t.text + "'");
        return it->second;
    }
    ActionId action(const text::Token& t) const {
        auto it = actions.find(t.text);
        if (it == actions.end()) throw ParseError(t.line, t.column, "unknown action '" + t.text + "'");
        return it->second;
    }
};

inline StateSet parse_state_block(text::Cursor& c, const ModelScope& scope, bool allow_empty) {
    c.expect("{");
    std::vector<StateId> ids;
    while (!c.peek_is("}")) ids.push_back(scope.state(c.ident("state")));
    if (ids.empty() && !allow_empty) c.fail("expected at least one state");
    c.expect("}");
    return make_state_set(std::move(ids));
}

inline Objective parse_objective_tokens(text::Cursor& c, const ModelScope& scope, std::size_t num_states) {
    const auto& kind = c.ident("objective kind");
    if (kind.text == "reach") return Objective::reach(parse_state_block(c, scope, true));
    if (kind.text == "safe") return Objective::safe(parse_state_block(c, scope, true));
    if (kind.text == "buchi") return Objective::buchi(parse_state_block(c, scope, true));
    if (kind.text == "cobuchi") return Objective::cobuchi(parse_state_block(c, scope, true));
    if (kind.text == "until") {
        auto t1 = parse_state_block(c, scope, true);
        auto t2 = parse_state_block(c, scope, true);
        return Objective::until(std::move(t1), std::move(t2));
    }
    if (kind.text == "parity") {
        const auto& open = c.expect("{");
        std::vector<std::optional<unsigned>> prio(num_states);
        while (!c.peek_is("}")) {
            const auto& st = c.ident("state");
            const StateId s = scope.state(st);
            c.expect(":");
            const auto& value = c.ident("priority");
            if (prio[s]) throw ParseError(st.line, st.column, "priority of '" + st.text + "' given twice");
            prio[s] = static_cast<unsigned>(text::parse_count(value, "priority"));
        }
        c.expect("}");
        Objective obj = Objective::parity({});
        for (StateId s = 0; s < num_states; ++s) {
            if (!prio[s]) throw ParseError(open.line, open.column, "parity map has no priority for a state");
            obj.priority.push_back(*prio[s]);
        }
        return obj;
    }
    throw ParseError(kind.line, kind.column, "unknown objective kind '" + kind.text + "'");
}

inline Mode parse_mode_token(const text::Token& t) {
    if (t.text == "almost") return Mode::almost_sure;
    if (t.text == "positive") return Mode::positive;
    throw ParseError(t.line, t.column, "expected 'almost' or 'positive', found '" + t.text + "'");
}

}  // namespace detail

/// Result of a lenient parse: the document plus every semantic problem found
/// (model invariant violations). Syntax errors still throw.
struct ModelParse {
    ModelDocument document;
    std::vector<ParseError> problems;
};

inline ModelParse parse_model_lenient(std::string_view input) {
    const auto lines = text::tokenize(input);
    if (lines.empty() || lines.front().tokens.front().text != "pomdp") {
        if (lines.empty()) throw ParseError(1, 1, "expected 'pomdp' header");
        throw ParseError(lines.front().number, lines.front().tokens.front().column, "expected 'pomdp' header");
    }
    ModelParse out;
    ModelDocument& doc = out.document;
    PomdpBuilder b;
    detail::ModelScope scope;
    std::set<std::string> obs_names;
    std::map<std::pair<StateId, ActionId>, int> trans_line;
    std::optional<StateId> initial;
    std::optional<Objective> objective;
    int first_state_line = 1;

    for (std::size_t li = 0; li < lines.size(); ++li) {
        const auto& line = lines[li];
        text::Cursor c(line);
        const auto& kw = c.ident("keyword");
        if (kw.text == "pomdp") {
            if (li != 0) throw ParseError(kw.line, kw.column, "duplicate 'pomdp' header");
            doc.name = c.ident("model name").text;
        } else if (kw.text == "states") {
            c.expect(":");
            if (scope.states.empty()) first_state_line = line.number;
            if (c.done()) c.fail("expected state names");
            while (!c.done()) {
                const auto& t = c.ident("state name");
                if (scope.states.count(t.text)) throw ParseError(t.line, t.column, "duplicate state '" + t.text + "'");
                scope.states[t.text] = b.add_state(t.text);
            }
        } else if (kw.text == "actions") {
            c.expect(":");
            if (c.done()) c.fail("expected action names");
            while (!c.done()) {
                const auto& t = c.ident("action name");
                if (scope.actions.count(t.text))
                    throw ParseError(t.line, t.column, "duplicate action '" + t.text + "'");
                scope.actions[t.text] = b.add_action(t.text);
            }
        } else if (kw.text == "obs") {
            const auto& name = c.ident("observation name");
            if (!obs_names.insert(name.text).second)
                throw ParseError(name.line, name.column, "duplicate observation '" + name.text + "'");
            auto members = detail::parse_state_block(c, scope, false);
            b.add_observation(name.text, members);
        } else if (kw.text == "init") {
            c.expect(":");
            initial = scope.state(c.ident("state"));
        } else if (kw.text == "trans") {
            const StateId s = scope.state(c.ident("state"));
            const auto& at = c.ident("action");
            const ActionId a = scope.action(at);
            if (!trans_line.emplace(std::pair{s, a}, line.number).second)
                throw ParseError(at.line, at.column, "duplicate transition for this state and action");
            c.expect("->");
            std::set<StateId> seen;
            for (;;) {
                const auto& dt = c.ident("target state");
                const StateId t = scope.state(dt);
                if (!seen.insert(t).second) throw ParseError(dt.line, dt.column, "target '" + dt.text + "' repeated");
                c.expect(":");
                const auto& wt = c.ident("probability");
                Rational w = text::parse_weight(wt);
                if (!w.is_positive()) throw ParseError(wt.line, wt.column, "non-positive weight " + wt.text);
                b.add_transition(s, a, t, w);
                if (c.done()) break;
                c.expect(",");
            }
        } else if (kw.text == "objective") {
            c.expect(":");
            if (objective) throw ParseError(kw.line, kw.column, "duplicate objective");
            objective = detail::parse_objective_tokens(c, scope, b.num_states());
        } else if (kw.text == "mode") {
            c.expect(":");
            if (doc.mode) throw ParseError(kw.line, kw.column, "duplicate mode");
            doc.mode = detail::parse_mode_token(c.ident("mode"));
        } else {
            throw ParseError(kw.line, kw.column, "unknown keyword '" + kw.text + "'");
        }
        c.end();
    }
    if (initial) b.set_initial(*initial);
    doc.pomdp = b.build();
    doc.objective = objective;

    const auto& p = doc.pomdp;
    for (const auto& v : validate(p)) {
        int where = first_state_line;
        // Distribution problems point at their trans line when there is one.
        for (const auto& [key, ln] : trans_line) {
            const std::string prefix = "transition " + p.state_name(key.first) + " " + p.action_name(key.second);
            if (v.message.rfind(prefix + " ", 0) == 0 || v.message.rfind(prefix + ":", 0) == 0) where = ln;
        }
        out.problems.emplace_back(where, 1, v.message);
    }
    return out;
}

/// Strict parse: the first syntax or semantic problem is thrown.
inline ModelDocument parse_model(std::string_view input) {
    auto r = parse_model_lenient(input);
    if (!r.problems.empty()) throw r.problems.front();
    return std::move(r.document);
}

/// Parses an inline objective such as "safe {0 1 2}" or "parity {a:0 b:1}"
/// against the state names of `p`.
inline Objective parse_objective_spec(std::string_view spec, const Pomdp& p) {
    auto lines = text::tokenize(spec);
    if (lines.size() != 1) throw ParseError(1, 1, "objective must be a single line");
    detail::ModelScope scope;
    for (StateId s = 0; s < p.num_states(); ++s) scope.states[p.state_name(s)] = s;
    text::Cursor c(lines.front());
    auto obj = detail::parse_objective_tokens(c, scope, p.num_states());
    c.end();
    return obj;
}

inline Mode parse_mode(std::string_view name) {
    if (name == "almost") return Mode::almost_sure;
    if (name == "positive") return Mode::positive;
    throw ParseError(1, 1, "expected 'almost' or 'positive', found '" + std::string(name) + "'");
}

namespace detail {

inline std::string state_block(const Pomdp& p, const StateSet& set) {
    std::string out = "{";
    for (StateId s : set) out += " " + p.state_name(s);
    return out + " }";
}

}  // namespace detail

inline std::string serialize_objective(const Pomdp& p, const Objective& obj) {
    std::string out = to_string(obj.kind);
    switch (obj.kind) {
        case ObjectiveKind::until:
            return out + " " + detail::state_block(p, obj.target) + " " + detail::state_block(p, obj.target2);
        case ObjectiveKind::parity:
            out += " {";
            for (StateId s = 0; s < obj.priority.size(); ++s)
                out += " " + p.state_name(s) + ":" + std::to_string(obj.priority[s]);
            return out + " }";
        default: return out + " " + detail::state_block(p, obj.target);
    }
}

/// Canonical text: declaration order, lowest-terms weights, one trans line
/// per (state, action).
inline std::string serialize_model(const ModelDocument& doc) {
    const auto& p = doc.pomdp;
    std::ostringstream os;
    os << "pomdp " << doc.name << "\n";
    os << "states:";
    for (const auto& s : p.state_names()) os << " " << s;
    os << "\nactions:";
    for (const auto& a : p.action_names()) os << " " << a;
    os << "\n";
    for (const auto& o : p.observations()) os << "obs " << o.name << " " << detail::state_block(p, o.members) << "\n";
    if (p.initial()) os << "init: " << p.state_name(*p.initial()) << "\n";
    for (StateId s = 0; s < p.num_states(); ++s)
        for (ActionId a = 0; a < p.num_actions(); ++a) {
            const auto& d = p.transition(s, a);
            if (d.empty()) continue;
            os << "trans " << p.state_name(s) << " " << p.action_name(a) << " ->";
            for (std::size_t i = 0; i < d.size(); ++i)
                os << (i ? ", " : " ") << p.state_name(d[i].first) << ":" << d[i].second;
            os << "\n";
        }
    if (doc.objective) os << "objective: " << serialize_objective(p, *doc.objective) << "\n";
    if (doc.mode) os << "mode: " << to_string(*doc.mode) << "\n";
    return os.str();
}

inline std::string serialize_model(const Pomdp& p, std::string name = "model") {
    return serialize_model(ModelDocument{std::move(name), p, std::nullopt, std::nullopt});
}

/// Moore-machine listing of a strategy:
///   strategy NAME / observations: ... / actions: ... / memory: K /
///   label M TEXT / initial: M / update M OBS ACT -> M' / next M OBS -> ACT:RAT, ...
inline std::string serialize_strategy(const FiniteMemoryStrategy& s) {
    std::ostringstream os;
    os << "strategy " << s.name << "\n";
    os << "observations:";
    for (const auto& o : s.observations) os << " " << o;
    os << "\nactions:";
    for (const auto& a : s.actions) os << " " << a;
    os << "\nmemory: " << s.memory_size() << "\n";
    for (MemoryId m = 0; m < s.memory_size(); ++m) os << "label " << m << " " << s.memory_labels[m] << "\n";
    os << "initial: " << s.initial << "\n";
    for (MemoryId m = 0; m < s.memory_size(); ++m)
        for (ObsId o = 0; o < s.observations.size(); ++o) {
            if (const auto& d = s.next(m, o)) {
                os << "next " << m << " " << s.observations[o] << " ->";
                for (std::size_t i = 0; i < d->size(); ++i)
                    os << (i ? ", " : " ") << s.actions[(*d)[i].first] << ":" << (*d)[i].second;
                os << "\n";
            }
        }
    for (MemoryId m = 0; m < s.memory_size(); ++m)
        for (ObsId o = 0; o < s.observations.size(); ++o)
            for (ActionId a = 0; a < s.actions.size(); ++a)
                if (const auto& u = s.update(m, o, a))
                    os << "update " << m << " " << s.observations[o] << " " << s.actions[a] << " -> " << *u << "\n";
    return os.str();
}

inline FiniteMemoryStrategy parse_strategy(std::string_view input) {
    const auto lines = text::tokenize(input);
    if (lines.empty() || lines.front().tokens.front().text != "strategy") {
        if (lines.empty()) throw ParseError(1, 1, "expected 'strategy' header");
        throw ParseError(lines.front().number, lines.front().tokens.front().column, "expected 'strategy' header");
    }
    FiniteMemoryStrategy s;
    std::map<std::string, ObsId> obs;
    std::map<std::string, ActionId> acts;
    bool sized = false;
    std::vector<char> labelled;

    auto need_size = [&](const text::Token& t) {
        if (!sized) throw ParseError(t.line, t.column, "'memory:' must come before '" + t.text + "'");
    };
    auto memory_id = [&](const text::Token& t) {
        auto m = text::parse_count(t, "memory id");
        if (m >= s.memory_size()) throw ParseError(t.line, t.column, "memory id " + t.text + " out of range");
        return static_cast<MemoryId>(m);
    };
    auto obs_id = [&](const text::Token& t) {
        auto it = obs.find(t.text);
        if (it == obs.end()) throw ParseError(t.line, t.column, "unknown observation '" + t.text + "'");
        return it->second;
    };
    auto action_id = [&](const text::Token& t) {
        auto it = acts.find(t.text);
        if (it == acts.end()) throw ParseError(t.line, t.column, "unknown action '" + t.text + "'");
        return it->second;
    };

    for (std::size_t li = 0; li < lines.size(); ++li) {
        const auto& line = lines[li];
        text::Cursor c(line);
        const auto& kw = c.ident("keyword");
        if (kw.text == "strategy") {
            if (li != 0) throw ParseError(kw.line, kw.column, "duplicate 'strategy' header");
            s.name = c.ident("strategy name").text;
        } else if (kw.text == "observations" || kw.text == "actions") {
            if (sized) throw ParseError(kw.line, kw.column, "'" + kw.text + "' must come before 'memory:'");
            c.expect(":");
            const bool is_obs = kw.text == "observations";
            while (!c.done()) {
                const auto& t = c.ident("name");
                auto& names = is_obs ? s.observations : s.actions;
                bool fresh = is_obs ? obs.emplace(t.text, static_cast<ObsId>(names.size())).second
                                    : acts.emplace(t.text, static_cast<ActionId>(names.size())).second;
                if (!fresh) throw ParseError(t.line, t.column, "duplicate name '" + t.text + "'");
                names.push_back(t.text);
            }
        } else if (kw.text == "memory") {
            c.expect(":");
            if (sized) throw ParseError(kw.line, kw.column, "duplicate 'memory:'");
            const auto& t = c.ident("memory size");
            const auto k = text::parse_count(t, "memory size");
            if (k == 0) throw ParseError(t.line, t.column, "memory size must be positive");
            s.memory_labels.resize(k);
            for (std::size_t m = 0; m < k; ++m) s.memory_labels[m] = "m" + std::to_string(m);
            s.update_table.assign(k * s.observations.size() * s.actions.size(), std::nullopt);
            s.next_table.assign(k * s.observations.size(), std::nullopt);
            labelled.assign(k, 0);
            sized = true;
        } else if (kw.text == "label") {
            need_size(kw);
            const auto& mt = c.ident("memory id");
            const MemoryId m = memory_id(mt);
            if (labelled[m]) throw ParseError(mt.line, mt.column, "memory " + mt.text + " labelled twice");
            labelled[m] = 1;
            // Label text is the raw remainder of the line.
            std::string rest = line.raw.substr(static_cast<std::size_t>(mt.column - 1) + mt.text.size());
            auto first = rest.find_first_not_of(" \t");
            auto last = rest.find_last_not_of(" \t");
            if (first == std::string::npos) throw ParseError(mt.line, mt.column, "empty memory label");
            s.memory_labels[m] = rest.substr(first, last - first + 1);
            continue;
        } else if (kw.text == "initial") {
            need_size(kw);
            c.expect(":");
            s.initial = memory_id(c.ident("memory id"));
        } else if (kw.text == "update") {
            need_size(kw);
            const MemoryId m = memory_id(c.ident("memory id"));
            const ObsId o = obs_id(c.ident("observation"));
            const ActionId a = action_id(c.ident("action"));
            c.expect("->");
            const MemoryId to = memory_id(c.ident("memory id"));
            if (s.update(m, o, a)) throw ParseError(kw.line, kw.column, "duplicate update row");
            s.update(m, o, a) = to;
        } else if (kw.text == "next") {
            need_size(kw);
            const MemoryId m = memory_id(c.ident("memory id"));
            const ObsId o = obs_id(c.ident("observation"));
            c.expect("->");
            ActionDistribution d;
            Rational total(0);
            for (;;) {
                const auto& at = c.ident("action");
                const ActionId a = action_id(at);
                if (std::any_of(d.begin(), d.end(), [&](const auto& e) { return e.first == a; }))
                    throw ParseError(at.line, at.column, "action '" + at.text + "' repeated");
                c.expect(":");
                const auto& wt = c.ident("probability");
                Rational w = text::parse_weight(wt);
                if (!w.is_positive()) throw ParseError(wt.line, wt.column, "non-positive weight " + wt.text);
                d.push_back({a, w});
                total += w;
                if (c.done()) break;
                c.expect(",");
            }
            if (total != Rational(1))
                throw ParseError(kw.line, kw.column, "action distribution sums to " + total.to_string());
            if (s.next(m, o)) throw ParseError(kw.line, kw.column, "duplicate next row");
            s.next(m, o) = std::move(d);
        } else {
            throw ParseError(kw.line, kw.column, "unknown keyword '" + kw.text + "'");
        }
        c.end();
    }
    if (!sized) throw ParseError(lines.back().number, 1, "missing 'memory:' declaration");
    return s;
}

}  // namespace pomdpq
