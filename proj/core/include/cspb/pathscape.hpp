#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cspb/hom_search.hpp"
#include "cspb/structure.hpp"

namespace cspb {

// A path with every edge oriented, written as a word over F (rising) and B
// (falling). Vertex i sits at levels[i]; levels are shifted so the lowest
// vertex is at 0.
struct OrientedPath {
    std::string word;
    std::vector<int> levels;
    int height = 0;
    bool minimal = false;

    explicit OrientedPath(std::string w);

    int edge_count() const { return static_cast<int>(word.size()); }
    int vertex_count() const { return static_cast<int>(word.size()) + 1; }
    // Level of the lower endpoint of edge i.
    int edge_level(int i) const { return std::min(levels[i], levels[i + 1]); }
    bool directed() const;
    // Digraph over {E/2}; vertex names are prefix + zero-padded index.
    Structure to_structure(const std::string& prefix = "v") const;
};

struct PathRepresentation {
    std::vector<Structure> bags;
    int j = 0;
    int k = 0;
};

Structure represented_structure(const PathRepresentation& rep);

struct RepReport {
    bool ok = true;
    std::vector<std::string> diagnostics;
};

RepReport validate_representation(const PathRepresentation& rep, const Structure* whole = nullptr);

// Text format: a structure followed by one "bags:" line listing each bag's
// elements in brackets. Bags are materialized as induced substructures and
// j, k are the realized intersection / size bounds.
PathRepresentation parse_representation(const std::string& text);
// Also hands back the structure section, so callers can cross-check it
// against the union of the bags.
PathRepresentation parse_representation(const std::string& text, Structure* whole_out);
std::string print_representation(const PathRepresentation& rep);

struct ZigzagResult {
    std::vector<Structure> bags;                            // one per edge
    std::vector<std::map<std::string, std::string>> isos;   // copy -> original
    std::vector<int> pair_levels;                           // per adjacent pair
    int j = 0;
    int k = 0;

    PathRepresentation as_representation() const { return {bags, j, k}; }
};

// Unrolls the representation along a minimal bottom-up path (levels[0] == 0,
// height equal to the number of bags): edge i gets a fresh copy of the bag
// at its level, glued to the previous copy along the shared boundary.
ZigzagResult zigzag(const PathRepresentation& rep, const OrientedPath& p);

// The union of the per-bag copy-to-original maps, as a verified homomorphism
// from the unrolled structure onto the represented one.
Homomorphism projection_hom(const ZigzagResult& z, const PathRepresentation& rep);

struct Filter {
    std::vector<std::pair<int, int>> delimiters; // inclusive level intervals
    int c = 0;
    int d = 0;
};

struct FilterReport {
    bool ok = true;
    std::vector<std::string> diagnostics;
};

FilterReport validate_filter(const Filter& f, const PathRepresentation& rep);

// True when, for every delimiter, the edges of p at covered levels form one
// contiguous run of equally oriented edges.
bool obeys_filter(const OrientedPath& p, const Filter& f);

// Collapses each delimiter stretch into a single bag and lines the remaining
// segments up in parallel; the cross-piece overlap set is added to every bag
// to restore persistence. Reports realized (j, k) on the output.
PathRepresentation regroup(const PathRepresentation& rep, const Filter& f);

struct PathwidthLimits {
    std::int64_t max_nodes = 2'000'000;
    int max_domain = 8;
    int max_blobs = 24;
};

// Complete search for a (j,k)-representation; absent when none exists.
std::optional<PathRepresentation> decide_pathwidth(const Structure& s, int j, int k,
                                                   const PathwidthLimits& limits = {});

struct NWindow {
    int start = 0;
    int s = 0;
};

// Leftmost, then smallest, window of shape F^s B^s F^s (or its mirrored
// B^s F^s B^s form); absent when p is directed.
std::optional<NWindow> find_n_digraph(const OrientedPath& p);

struct MaltsevStep {
    OrientedPath p_prime;
    Homomorphism hom; // zigzag(rep, p_prime) union -> target
};

// Removes one N-window from p and rebuilds the homomorphism on the shorter
// unrolling, combining the three window copies with the Maltsev operation.
MaltsevStep maltsev_unzigzag(const PathRepresentation& rep, const OrientedPath& p,
                             const Homomorphism& hom, const Operation& m);

// Iterates until the path is directed and returns the induced homomorphism
// from the represented structure itself.
Homomorphism maltsev_unzigzag_full(const PathRepresentation& rep, const OrientedPath& p,
                                   const Homomorphism& hom, const Operation& m);

} // namespace cspb
