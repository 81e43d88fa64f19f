#pragma once

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "pomdpq/pomdpq.hpp"

namespace pomdpq::cli {

enum ExitCode { kWinning = 0, kNotWinning = 1, kUndecidable = 2, kInputError = 3 };

/// Input problem reported on the diagnostic stream with exit code 3.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Io {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

inline std::string read_source(const std::string& path, Io& io) {
    std::ostringstream buf;
    if (path == "-") {
        buf << io.in.rdbuf();
        return buf.str();
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read " + path);
    buf << f.rdbuf();
    return buf.str();
}

inline ModelDocument load_model(const std::string& path, Io& io) {
    try {
        return parse_model(read_source(path, io));
    } catch (const ParseError& e) {
        throw InputError(path + ": " + e.what());
    }
}

inline FiniteMemoryStrategy load_strategy(const std::string& path, Io& io) {
    try {
        return parse_strategy(read_source(path, io));
    } catch (const ParseError& e) {
        throw InputError(path + ": " + e.what());
    }
}

/// Query options shared by solve, synthesize, check and simulate; inline
/// values win over the model file's annotations.
struct QueryFlags {
    std::string model;
    std::string objective;
    std::string mode;
    std::string from;

    void add_to(CLI::App& cmd, bool with_mode) {
        cmd.add_option("MODEL", model, "model file, or - for standard input")->required();
        cmd.add_option("--objective", objective, "objective, e.g. \"safe {0 1 2}\"");
        if (with_mode) cmd.add_option("--mode", mode, "almost or positive");
        cmd.add_option("--from", from, "start state (default: init, else the first state)");
    }
};

struct Query {
    ModelDocument doc;
    Objective objective;
    Mode mode = Mode::almost_sure;
    StateId from = 0;
};

inline Query resolve(const QueryFlags& f, Io& io, bool need_mode) {
    Query q{load_model(f.model, io), {}, Mode::almost_sure, 0};
    const auto& p = q.doc.pomdp;
    if (!f.objective.empty()) {
        try {
            q.objective = parse_objective_spec(f.objective, p);
        } catch (const ParseError& e) {
            throw InputError("--objective: " + e.message());
        }
    } else if (q.doc.objective) {
        q.objective = *q.doc.objective;
    } else {
        throw InputError("no objective given and the model declares none");
    }
    if (!f.mode.empty()) {
        if (f.mode == "almost")
            q.mode = Mode::almost_sure;
        else if (f.mode == "positive")
            q.mode = Mode::positive;
        else
            throw InputError("--mode must be 'almost' or 'positive'");
    } else if (q.doc.mode) {
        q.mode = *q.doc.mode;
    } else if (need_mode) {
        throw InputError("no mode given and the model declares none");
    }
    if (!f.from.empty()) {
        auto s = p.find_state(f.from);
        if (!s) throw InputError("--from: unknown state '" + f.from + "'");
        q.from = *s;
    } else if (p.initial()) {
        q.from = *p.initial();
    }
    return q;
}

inline StateSet simulation_target(const Objective& obj) {
    switch (obj.kind) {
        case ObjectiveKind::until: return obj.target2;
        case ObjectiveKind::parity: {
            StateSet even;
            for (StateId s = 0; s < obj.priority.size(); ++s)
                if (obj.priority[s] % 2 == 0) even.push_back(s);
            return even;
        }
        default: return obj.target;
    }
}

inline int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    Io io{in, out, err};
    CLI::App app{"Qualitative analysis of partially observable MDPs"};
    app.require_subcommand(1);

    QueryFlags solve_flags;
    bool details = false;
    auto* solve_cmd = app.add_subcommand("solve", "decide a qualitative query");
    solve_flags.add_to(*solve_cmd, true);
    solve_cmd->add_flag("--details", details, "also print the winning states and strategy size");

    QueryFlags synth_flags;
    std::string synth_out;
    bool synth_path = false;
    auto* synth_cmd = app.add_subcommand("synthesize", "write a winning strategy");
    synth_flags.add_to(*synth_cmd, true);
    synth_cmd->add_option("--out", synth_out, "strategy file (default: standard output)");
    synth_cmd->add_flag("--path", synth_path, "positive reachability: pure strategy replaying a shortest path");

    QueryFlags check_flags;
    std::string check_strat;
    auto* check_cmd = app.add_subcommand("check", "exact verdict of a strategy: Zero, Positive or One");
    check_flags.add_to(*check_cmd, false);
    check_cmd->add_option("STRATEGY", check_strat, "strategy file")->required();

    QueryFlags sim_flags;
    std::string sim_strat, sim_format = "text";
    std::uint64_t runs = 1000, steps = 100, seed = 0;
    unsigned threads = 1;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo runs of a strategy");
    sim_flags.add_to(*sim_cmd, false);
    sim_cmd->add_option("STRATEGY", sim_strat, "strategy file")->required();
    sim_cmd->add_option("--runs", runs, "number of runs")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--steps", steps, "steps per run")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", seed, "random seed");
    sim_cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--format", sim_format, "text or kv")->check(CLI::IsMember({"text", "kv"}));

    auto* gen_cmd = app.add_subcommand("generate", "print a generated model");
    gen_cmd->require_subcommand(1);
    std::size_t family_n = 2;
    auto* gen_safety = gen_cmd->add_subcommand("safety-family", "prime-loop model, almost-sure safety");
    gen_safety->add_option("N", family_n, "family index")->required()->check(CLI::PositiveNumber);
    auto* gen_reach = gen_cmd->add_subcommand("reach-family", "prime-loop model, almost-sure reachability");
    gen_reach->add_option("N", family_n, "family index")->required()->check(CLI::PositiveNumber);
    std::string circuit_file, variant = "reach";
    auto* gen_cvp = gen_cmd->add_subcommand("cvp", "MDP from a circuit");
    gen_cvp->add_option("FILE", circuit_file, "circuit file, or -")->required();
    gen_cvp->add_option("--variant", variant, "reach or safety")->check(CLI::IsMember({"reach", "safety"}));
    auto* gen_ex1 = gen_cmd->add_subcommand("example1", "the four-state example");

    std::string validate_file;
    auto* validate_cmd = app.add_subcommand("validate", "check a model file");
    validate_cmd->add_option("MODEL", validate_file, "model file, or -")->required();

    std::string belief_file, belief_from;
    auto* belief_cmd = app.add_subcommand("belief", "print the belief-support MDP in model format");
    belief_cmd->add_option("MODEL", belief_file, "model file, or -")->required();
    belief_cmd->add_option("--from", belief_from, "start state");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : kInputError;
    }

    try {
        if (*solve_cmd) {
            auto q = resolve(solve_flags, io, true);
            auto cls = classify(q.objective, q.mode);
            if (!cls.decidable) {
                out << "UNDECIDABLE: " << cls.description << "\n";
                return kUndecidable;
            }
            auto v = solve(q.doc.pomdp, q.objective, q.mode, q.from);
            out << (v.winning ? "WINNING" : "NOT-WINNING") << "\n";
            if (details) {
                out << "procedure: " << cls.description << "\n";
                out << "winning states:";
                for (StateId s : v.winning_states) out << " " << q.doc.pomdp.state_name(s);
                out << "\n";
                if (v.witness) out << "strategy memory: " << v.witness->memory_size() << "\n";
            }
            return v.winning ? kWinning : kNotWinning;
        }
        if (*synth_cmd) {
            auto q = resolve(synth_flags, io, true);
            auto cls = classify(q.objective, q.mode);
            if (!cls.decidable) {
                err << "UNDECIDABLE: " << cls.description << "\n";
                return kUndecidable;
            }
            std::optional<FiniteMemoryStrategy> s;
            if (synth_path) {
                if (q.objective.kind != ObjectiveKind::reach || q.mode != Mode::positive)
                    throw InputError("--path applies to positive reachability only");
                s = pos_reach_path_strategy(q.doc.pomdp, q.objective.target, q.from);
            } else {
                auto v = solve(q.doc.pomdp, q.objective, q.mode, q.from);
                if (v.winning) s = std::move(v.witness);
            }
            if (!s) {
                err << "NOT-WINNING: no strategy from " << q.doc.pomdp.state_name(q.from) << "\n";
                return kNotWinning;
            }
            const auto text = serialize_strategy(*s);
            if (synth_out.empty()) {
                out << text;
            } else {
                std::ofstream f(synth_out, std::ios::binary);
                if (!f || !(f << text)) throw InputError("cannot write " + synth_out);
            }
            return kWinning;
        }
        if (*check_cmd) {
            auto q = resolve(check_flags, io, false);
            auto s = load_strategy(check_strat, io);
            out << to_string(check_strategy(q.doc.pomdp, s, q.from, q.objective)) << "\n";
            return 0;
        }
        if (*sim_cmd) {
            auto q = resolve(sim_flags, io, false);
            auto s = load_strategy(sim_strat, io);
            SimulationOptions opt;
            opt.runs = runs;
            opt.steps = steps;
            opt.seed = seed;
            opt.threads = threads;
            opt.target = simulation_target(q.objective);
            auto r = simulate(q.doc.pomdp, s, q.from, opt);
            out << (sim_format == "kv" ? format_report_kv(q.doc.pomdp, r) : format_report_text(q.doc.pomdp, r));
            return 0;
        }
        if (*gen_cmd) {
            ModelDocument doc;
            if (*gen_safety) doc = gen_safety_family(family_n);
            if (*gen_reach) doc = gen_reach_family(family_n);
            if (*gen_ex1) doc = gen_example1();
            if (*gen_cvp) {
                Circuit c;
                try {
                    c = parse_circuit(read_source(circuit_file, io));
                } catch (const ParseError& e) {
                    throw InputError(circuit_file + ": " + e.what());
                }
                doc = variant == "reach" ? gen_cvp_reach(c) : gen_cvp_safety(c);
            }
            out << serialize_model(doc);
            return 0;
        }
        if (*validate_cmd) {
            ModelParse r;
            try {
                r = parse_model_lenient(read_source(validate_file, io));
            } catch (const ParseError& e) {
                throw InputError(validate_file + ": " + e.what());
            }
            if (r.problems.empty()) {
                out << "valid: " << r.document.pomdp.num_states() << " states, " << r.document.pomdp.num_actions()
                    << " actions, " << r.document.pomdp.num_observations() << " observations\n";
                return 0;
            }
            for (const auto& e : r.problems) out << validate_file << ": " << e.what() << "\n";
            return kNotWinning;
        }
        if (*belief_cmd) {
            auto doc = load_model(belief_file, io);
            StateId from = doc.pomdp.initial().value_or(0);
            if (!belief_from.empty()) {
                auto s = doc.pomdp.find_state(belief_from);
                if (!s) throw InputError("--from: unknown state '" + belief_from + "'");
                from = *s;
            }
            auto bm = belief_mdp(doc.pomdp, from);
            out << serialize_model(ModelDocument{doc.name + "_beliefs", bm.mdp.pomdp(), std::nullopt, std::nullopt});
            return 0;
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const StrategyMismatch& e) {
        err << "error: strategy does not fit the model: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

}  // namespace pomdpq::cli
