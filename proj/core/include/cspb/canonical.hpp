#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "cspb/datalog.hpp"
#include "cspb/structure.hpp"

namespace cspb {

enum class CanonicalMode { linear, symmetric };

std::string to_string(CanonicalMode m);

// A template program whose IDB symbols denote subsets of B^r (r <= j).
// Names are deterministic: I<r>_<m> where m encodes the tuple set as a
// bitmask over the lexicographic enumeration of B^r. The goal is I0_0,
// the empty 0-ary subset.
struct CanonicalProgram {
    DatalogProgram base;
    std::map<std::string, std::set<Tuple>> subscript_index;
    int j = 0;
    int k = 0;
    CanonicalMode mode = CanonicalMode::linear;
};

struct CanonicalLimits {
    // Budget for the materialized rule enumeration (candidate count).
    std::int64_t max_rule_candidates = 20'000'000;
    // Budget for lazy acceptance: total (tuple, subscript) states marked.
    std::int64_t max_states = 2'000'000;
    // Guard on |B|^r, the subscript bitmask width.
    int max_subscript_bits = 16;
    // Guard on the number of bags the lazy evaluator may enumerate.
    std::int64_t max_bags = 200'000;
};

// Materializes the full rule set. Intended for small templates only; the
// candidate space is estimated up front and a ResourceError is thrown when
// it exceeds the budget.
CanonicalProgram build_canonical(const Structure& b, int j, int k, CanonicalMode mode,
                                 const CanonicalLimits& limits = {});

struct CanonicalAcceptance {
    bool accepted = false;
    // Present when accepted: a derivation over witness_program.base.
    std::optional<Derivation> witness;
    CanonicalProgram witness_program;
    std::int64_t states_marked = 0;
};

// Decides acceptance of `a` by the canonical program of `b` without
// materializing it: states are (instantiated tuple, subscript) pairs and
// transitions are the valid single-rule steps read off bags of at most k
// elements of `a`. Agrees exactly with evaluate(build_canonical(...), a).
CanonicalAcceptance canonical_accept(const Structure& b, int j, int k, CanonicalMode mode,
                                     const Structure& a, const CanonicalLimits& limits = {});

} // namespace cspb
