#pragma once

#include <stdexcept>
#include <string>

#include "pomdpq/fm_strategy.hpp"
#include "pomdpq/product.hpp"
#include "pomdpq/qual_pomdp.hpp"

namespace pomdpq {

class SynthesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Winning strategy for a decidable, winning query. Throws SynthesisError
/// when the query is refused or losing.
inline FiniteMemoryStrategy synthesize(const Pomdp& p, const Objective& obj, Mode mode, StateId from) {
    auto v = solve(p, obj, mode, from);
    if (!v.decidable) throw SynthesisError("query refused: " + *v.refusal_reason);
    if (!v.winning || !v.witness) throw SynthesisError("state " + p.state_name(from) + " is not winning");
    return std::move(*v.witness);
}

/// The verdict an exact check must reach for a strategy to witness `mode`.
inline bool verdict_matches(QualitativeVerdict v, Mode mode) {
    return mode == Mode::almost_sure ? v == QualitativeVerdict::one : v != QualitativeVerdict::zero;
}

/// Synthesizes and confirms the strategy with the exact checker.
inline bool synthesize_and_verify(const Pomdp& p, const Objective& obj, Mode mode, StateId from,
                                  FiniteMemoryStrategy* out = nullptr) {
    auto s = synthesize(p, obj, mode, from);
    bool ok = verdict_matches(check_strategy(p, s, from, obj), mode);
    if (out) *out = std::move(s);
    return ok;
}

}  // namespace pomdpq
