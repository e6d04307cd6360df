#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cspb/structure.hpp"

namespace cspb {

// Reserved successor built-ins, usable in rule bodies without declaration.
bool is_builtin_predicate(std::string_view name);
int builtin_arity(std::string_view name);

struct DatalogAtom {
    std::string pred;
    std::vector<std::string> vars;

    bool operator==(const DatalogAtom&) const = default;
    bool operator<(const DatalogAtom& o) const {
        return std::tie(pred, vars) < std::tie(o.pred, o.vars);
    }
};

struct DatalogRule {
    DatalogAtom head;
    std::vector<DatalogAtom> body;
    bool is_goal = false; // set by the parser: head predicate is the goal

    // Distinct variables in first-occurrence order (head first, then body).
    std::vector<std::string> variables() const;
    std::vector<const DatalogAtom*> body_idb(const class DatalogProgram& p) const;
    bool recursive(const class DatalogProgram& p) const;

    bool operator==(const DatalogRule&) const = default;
};

class DatalogProgram {
  public:
    Vocabulary edb;  // declared extensional symbols (built-ins excluded)
    Vocabulary idb;  // declared intensional symbols
    std::string goal; // 0-ary IDB
    std::vector<DatalogRule> rules;
    std::vector<std::string> warnings; // filled by the parser

    bool is_idb(std::string_view name) const { return idb.has(name); }
    bool is_edb(std::string_view name) const {
        return edb.has(name) || is_builtin_predicate(name);
    }
    bool uses_builtins() const;

    bool operator==(const DatalogProgram&) const = default;
};

// Text format:
//   edb E/2, S/1, T/1.
//   idb I/1, G/0.
//   goal G.
//   I(x) :- S(x).
//   I(y) :- I(x), E(x,y).
//   G :- I(x), T(x).
// '#' starts a comment. 0-ary atoms are written bare.
DatalogProgram parse_program(const std::string& text);
std::string print_program(const DatalogProgram& p);

enum class Fragment { general, linear, symmetric };
std::string to_string(Fragment f);

struct FragmentReport {
    Fragment fragment = Fragment::general;
    int j = 0; // max arity among IDB atoms occurring in rules
    int k = 0; // max distinct variables in a rule
    std::vector<int> missing_symmetric_pairs; // rule indices
};

FragmentReport classify_fragment(const DatalogProgram& p);

struct DerivationStep {
    int rule = 0;
    std::map<std::string, std::string> assignment;

    bool operator==(const DerivationStep&) const = default;
};

struct Derivation {
    std::vector<DerivationStep> steps;

    // All assignment values, sorted and deduplicated.
    std::vector<std::string> codomain() const;

    bool operator==(const Derivation&) const = default;
};

struct ValidationResult {
    bool ok = true;
    std::vector<std::string> diagnostics;
};

// Checks shape (first step nonrecursive, last step a goal rule, one body IDB
// per later step), totality of assignments, positional chaining between
// consecutive steps, and, when `a` is given, that every instantiated body
// EDB atom holds in `a`.
ValidationResult validate_derivation(const DatalogProgram& p, const Derivation& d,
                                     const Structure* a = nullptr);

// The instantiated non-built-in EDB atoms of `d` as a structure over p.edb;
// the domain is exactly the elements occurring in those tuples.
Structure extract_structure(const DatalogProgram& p, const Derivation& d);

struct DerivationProperties {
    bool free = false;
    bool read_once = false;
    // Classes of chained (step, variable) pairs, each listed with its value.
    std::vector<std::vector<std::pair<int, std::string>>> eq_classes;
};

DerivationProperties derivation_properties(const DatalogProgram& p, const Derivation& d);

struct EvalLimits {
    std::int64_t max_facts = 1'000'000;
    int max_domain = 255;   // tuple packing guard
    int max_rule_vars = 12; // assignment packing guard
};

struct EvalResult {
    bool accepted = false;
    std::optional<Derivation> witness; // linear/symmetric programs only
    std::int64_t derived_facts = 0;
    int rounds = 0;
};

// Semi-naive bottom-up fixpoint with one-step provenance. `a` must provide
// every EDB symbol the program uses (built-ins included, see
// SuccessorStructure::with_builtins). Witnesses are produced for accepted
// linear runs, chosen deterministically (rule index, then lexicographic
// assignment, earliest round first) and validated before return.
EvalResult evaluate(const DatalogProgram& p, const Structure& a, const EvalLimits& limits = {});

struct ReadOnceSearchLimits {
    // Depth cap for the iterative deepening; <= 0 means twice the number of
    // instantiated non-built-in EDB facts of the input, plus two.
    int max_depth = 0;
    std::int64_t max_nodes = 5'000'000;
};

// Deterministic iterative-deepening search for an accepting derivation whose
// non-built-in EDB atoms are pairwise distinct. Linear programs only.
std::optional<Derivation> search_read_once_derivation(const DatalogProgram& p, const Structure& a,
                                                      const ReadOnceSearchLimits& limits = {});

} // namespace cspb
