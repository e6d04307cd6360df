#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cspb/datalog.hpp"
#include "cspb/hom_search.hpp"
#include "cspb/pathscape.hpp"
#include "cspb/structure.hpp"

namespace cspb {

// A structure over a plain vocabulary whose domain is {1..n}, paired with the
// canonical order relations first = {1}, last = {n}, suc = {(i,i+1)} that are
// determined by n alone.
struct SuccessorStructure {
    Structure base; // non-built-in relations only, domain "1".."n"
    int n = 0;

    // Renames `a` through `ordering`, a bijection onto {1..n}.
    static SuccessorStructure attach(const Structure& a,
                                     const std::map<std::string, int>& ordering);
    // Identity attachment for a structure whose domain is already "1".."n".
    static SuccessorStructure from_numbered(const Structure& a);

    // `base` extended with the generated first/last/suc relations, the form
    // evaluate() consumes.
    Structure with_builtins() const;
};

// One occurrence of an element inside a relation tuple.
struct Occurrence {
    std::string rel;
    Tuple tuple;
    int pos = 0; // 0-based position inside the tuple

    bool operator==(const Occurrence&) const = default;
    bool operator<(const Occurrence& o) const {
        return std::tie(rel, tuple, pos) < std::tie(o.rel, o.tuple, o.pos);
    }
};

// Every occurrence of `elem` in the relations of `a`, sorted.
std::vector<Occurrence> occurrence_set(const Structure& a, const std::string& elem);

// Rewrites the chosen occurrences of `elem` to a fresh primed copy of it.
// `chosen` must be a nonempty strict subset of occurrence_set(a, elem), which
// must itself have at least two members. Tuple counts never change.
Structure split_structure(const Structure& a, const std::string& elem,
                          const std::vector<Occurrence>& chosen);

using MembershipOracle = std::function<bool(const Structure&)>;

// Greedy descent inside the class decided by `member`: single tuple removals,
// then single element removals, then single splits, each family scanned in
// lexicographic order, restarting after every accepted move. The result is in
// the class, maps homomorphically back to `a`, and admits no further single
// move that stays in the class.
Structure minimize_in_class(const Structure& a, const MembershipOracle& member);

struct MnbpLabel {
    std::string rel;
    Tuple tuple;

    bool operator==(const MnbpLabel&) const = default;
    bool operator<(const MnbpLabel& o) const {
        return std::tie(rel, tuple) < std::tie(o.rel, o.tuple);
    }
};

struct MnbpArc {
    int from = 0;
    int to = 0;
    std::optional<MnbpLabel> label; // absent = arc always live
};

// Monotone nondeterministic branching program over one vocabulary at one
// input size. Node 0 is the source, node 1 the sink; the rest are
// (IDB, tuple) states or auxiliary chain nodes.
struct Mnbp {
    int n = 0;
    Vocabulary vocab;
    std::vector<std::string> node_names;
    std::vector<MnbpArc> arcs;
    int idb_states = 0;  // distinct (IDB, tuple) nodes
    int state_bound = 0; // iota * n^kappa, which idb_states never exceeds

    int source() const { return 0; }
    int sink() const { return 1; }
    int size() const { return static_cast<int>(node_names.size()); }
};

struct MnbpRun {
    bool accepted = false;
    std::vector<int> path; // arc indices of the found accepting walk
    bool read_once = false; // no label repeats on the returned path
};

// Keeps the arcs whose label is a tuple present in `a` (unlabeled arcs always
// survive) and searches the surviving graph for a shortest source-to-sink
// walk.
MnbpRun evaluate_mnbp(const Mnbp& h, const SuccessorStructure& a);

struct CompileLimits {
    std::int64_t max_instantiations = 10'000'000;
};

// Grounds a linear program over the domain {1..n}. Built-in atoms are decided
// here, so arcs carry only declared EDB atoms as labels; rules with several
// EDB atoms become chains through fresh auxiliary nodes. Acceptance of the
// result agrees with evaluate() on every size-n input.
Mnbp compile_to_mnbp(const DatalogProgram& p, int n, const CompileLimits& limits = {});

struct SurgeryBudget {
    int max_embedders = 4096;
    std::int64_t max_pairs = 100'000;
    ReadOnceSearchLimits derivation;
    SearchLimits search;
};

struct SurgeryTrace {
    std::map<std::string, int> embedder_a; // element of m -> number
    std::map<std::string, int> embedder_b;
    std::vector<Structure> bags_a; // pruned tuple distribution of derivation_a
    std::vector<Structure> bags_b;
    std::vector<Structure> prototype; // the shared pulled-back bag sequence
    int cut_bag = 0;                  // 0-based index into the prototype
    std::string cut_idb;
    Tuple cut_tuple;
    Derivation derivation_a;
    Derivation derivation_b;
    Derivation spliced;
    Structure extracted; // instantiated EDB atoms of the spliced derivation
    // Block-collapse map from extracted elements onto the prototype union.
    std::map<std::string, std::string> collapse;
    bool spliced_valid = false;
    bool split_variant = false; // extracted is a split variant of the prototype union
    int splits_added = 0;
};

// Enumerates block-respecting renamings of m into {1..n}, finds a read-once
// derivation for each, groups the derivations by pulled-back bag sequence,
// and looks inside one group for two derivations that share an instantiated
// head IDB at a bag index where the prefix/suffix element overlap exceeds the
// program's IDB width while their extracted structures share at most that
// many elements. Such a pair is cut and cross-concatenated; absent when the
// scan exhausts its budget without finding one.
std::optional<SurgeryTrace> surgery_experiment(const DatalogProgram& p, const Structure& m, int n,
                                               const SurgeryBudget& budget = {});

struct CutDecomposition {
    std::optional<PathRepresentation> rep;
    int violation_g = 0; // 1-based prefix index of the first overlap above j
};

// Widens a bag list into a path representation: every middle bag absorbs the
// elements shared between its strict prefix and strict suffix. Succeeds and
// validates at width (j, k+j) exactly when every prefix/suffix overlap has at
// most j elements; otherwise reports the first violating index.
CutDecomposition build_cut_decomposition(const std::vector<Structure>& bags, int j, int k);

} // namespace cspb
