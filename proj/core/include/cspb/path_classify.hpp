#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cspb/hom_search.hpp"
#include "cspb/pathscape.hpp"
#include "cspb/structure.hpp"

namespace cspb {

// One piece of a staircase decomposition: either a forward run of `len`
// edges, or an oscillation (B^ell F^ell)^r B^ell hanging below its peaks.
struct StairSegment {
    bool is_wave = false;
    int len = 0;
    int ell = 0;
    int r = 0;
};

struct PathShape {
    enum class Kind { directed, wave, staircase, other };

    Kind kind = Kind::other;
    // Set when the shape was found on the flipped-and-reversed word; the
    // digraph is the same, written from the other end.
    bool mirrored = false;
    int wave_r = 0;
    int wave_ell = 0;
    std::vector<StairSegment> segments;

    // Rebuilds the word the decomposition describes; empty for kind other.
    std::string resynthesize() const;
};

std::string to_string(PathShape::Kind kind);

// Most specific kind first: directed, then wave F(F^l B^l)^r F^l F, then
// staircase, each also tried on the mirrored word, and other as fallback.
PathShape classify_path_shape(const OrientedPath& p);

std::string mirror_word(const std::string& word);

// Minimal common predecessor of equal-height bottom-up minimal paths: the
// shortest simultaneous walk from (start,start) to (end,end) stepping along
// arcs the same way in both. Absent only when max_len is exhausted.
std::optional<OrientedPath> common_path(const OrientedPath& p1, const OrientedPath& p2,
                                        int max_len);

struct NlSearchLimits {
    int max_q_len = 12;
    SearchLimits search;
};

// A level-band witness inside a word: the subword [band_start, band_end)
// carves into three minimal parts of one height h sharing a single level
// band, the outer two rising and the middle one falling back across it.
// All indices refer to the search frame: the word itself, or its mirror
// when `flipped` is set (same digraph written from the other end).
struct NlWitness {
    int band_start = 0;  // first word index of the rising first part
    int split_start = 0; // first word index of the falling middle part
    int split_end = 0;   // first word index of the rising final part
    int band_end = 0;    // one past the last word index of the final part
    bool flipped = false;
    int h = 0;
    OrientedPath q;
    std::map<std::string, std::string> hom_to_p1;
    std::map<std::string, std::string> hom_to_p3;
    bool p2_ruled_out = false; // exhaustive search found no map into the middle
};

// Scans subword carvings P1 P2 P3 of equal height with P1, P3 rising and P2
// falling, then hunts a minimal rising q of that height mapping into the
// outer parts but not the middle one. Tries the word first and its mirror
// second; within a frame, bands by leftmost start, then shortest parts,
// then shortest q.
std::optional<NlWitness> nl_witness_search(const OrientedPath& b,
                                           const NlSearchLimits& limits = {});

// The path the witness indices refer to: b, or its mirror when flipped.
OrientedPath witness_frame(const OrientedPath& b, const NlWitness& w);

struct LeqGadget {
    Structure g;
    std::string x;
    std::string y;
    std::string zero_vertex; // image label for 0 in the target path
    std::string one_vertex;  // image label for 1
    bool verified = false;
    std::set<std::pair<std::string, std::string>> projection; // realized (x,y) images
};

// Assembles the order gadget from a copy of b, the witness path, and common
// paths of the parts, then checks by full enumeration that the (x,y) images
// are exactly {(0,0), (0,1), (1,1)}. A failed check is reported through
// `verified`, never hidden.
LeqGadget build_leq_gadget(const OrientedPath& b, const NlWitness& w);

struct WaveObstructions {
    int h = 0; // oscillation depth; any word of height above h+2 never maps
    std::vector<OrientedPath> paths;
};

// Instantiates the two height-(h+2) obstruction templates up to max_len,
// keeping only candidates verified not to map into q. Anything of height
// above h+2 is covered by the symbolic bound instead of materialization.
WaveObstructions wave_obstructions(const OrientedPath& q, int max_len);

bool obstruction_set_covers(const WaveObstructions& obs, const OrientedPath& candidate,
                            const SearchLimits& limits = {});

// Automorphism count is one; input must be a core.
bool is_rigid_path(const OrientedPath& p);

} // namespace cspb
