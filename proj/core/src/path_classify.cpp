#include "cspb/path_classify.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <stdexcept>

#include "cspb/errors.hpp"

namespace cspb {

namespace {

struct Run {
    char ch;
    int len;
};

std::vector<Run> run_decompose(const std::string& word) {
    std::vector<Run> runs;
    for (char ch : word) {
        if (!runs.empty() && runs.back().ch == ch)
            ++runs.back().len;
        else
            runs.push_back({ch, 1});
    }
    return runs;
}

std::string padded_index(int i, int width) {
    std::string s = std::to_string(i);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

// Matches the naming used by OrientedPath::to_structure.
std::string vertex_name(const OrientedPath& p, const std::string& prefix, int index) {
    int width = static_cast<int>(std::to_string(p.vertex_count() - 1).size());
    return prefix + padded_index(index, width);
}

int top_index(const OrientedPath& p) {
    for (int i = 0; i < p.vertex_count(); ++i)
        if (p.levels[i] == p.height) return i;
    return -1;
}

bool ascending(const OrientedPath& p) {
    return p.levels.front() == 0 && p.levels.back() == p.height;
}

bool descending(const OrientedPath& p) {
    return p.levels.front() == p.height && p.levels.back() == 0;
}

std::optional<std::pair<int, int>> try_wave(const std::string& word) {
    auto runs = run_decompose(word);
    if (runs.size() < 3 || runs.front().ch != 'F' || runs.back().ch != 'F') return std::nullopt;
    int ell = runs[1].len;
    int r = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].ch == 'B') {
            if (runs[i].len != ell) return std::nullopt;
            ++r;
        } else if (i != 0 && i + 1 != runs.size() && runs[i].len != ell) {
            return std::nullopt;
        }
    }
    if (runs.front().len != ell + 1 || runs.back().len != ell + 1) return std::nullopt;
    return std::make_pair(r, ell);
}

struct StairParser {
    const std::vector<Run>& runs;
    const std::vector<int>& levels;
    std::vector<int> run_pos;
    std::vector<StairSegment> segs;

    StairParser(const std::vector<Run>& rs, const std::vector<int>& lv) : runs(rs), levels(lv) {
        int pos = 0;
        for (const Run& r : rs) {
            run_pos.push_back(pos);
            pos += r.len;
        }
    }

    bool parse(std::size_t idx, bool any_wave, int last_peak, int last_trough) {
        if (idx == runs.size()) return any_wave;
        if (runs[idx].ch == 'F') {
            segs.push_back({false, runs[idx].len, 0, 0});
            if (parse(idx + 1, any_wave, last_peak, last_trough)) return true;
            segs.pop_back();
            return false;
        }
        // A backward run opens an oscillation hanging from its peak.
        int ell = runs[idx].len;
        int peak = levels[run_pos[idx]];
        int trough = peak - ell;
        if (any_wave && !(peak > last_peak && trough > last_trough)) return false;
        int max_r = 0;
        while (idx + 2 * max_r + 2 < runs.size() && runs[idx + 2 * max_r + 1].len == ell &&
               runs[idx + 2 * max_r + 2].len == ell)
            ++max_r;
        for (int r = max_r; r >= 0; --r) {
            segs.push_back({true, 0, ell, r});
            if (parse(idx + 2 * r + 1, true, peak, trough)) return true;
            segs.pop_back();
        }
        return false;
    }
};

std::optional<std::vector<StairSegment>> try_staircase(const OrientedPath& p) {
    if (!p.minimal) return std::nullopt;
    auto runs = run_decompose(p.word);
    StairParser parser(runs, p.levels);
    if (!parser.parse(0, false, 0, 0)) return std::nullopt;
    return parser.segs;
}

} // namespace

std::string mirror_word(const std::string& word) {
    std::string out;
    out.reserve(word.size());
    for (auto it = word.rbegin(); it != word.rend(); ++it) out += *it == 'F' ? 'B' : 'F';
    return out;
}

std::string to_string(PathShape::Kind kind) {
    switch (kind) {
        case PathShape::Kind::directed: return "directed";
        case PathShape::Kind::wave: return "wave";
        case PathShape::Kind::staircase: return "staircase";
        case PathShape::Kind::other: return "other";
    }
    return "other";
}

std::string PathShape::resynthesize() const {
    if (kind == Kind::other) return "";
    std::string core;
    if (kind == Kind::directed) {
        core = std::string(segments.front().len, 'F');
    } else if (kind == Kind::wave) {
        core = "F";
        for (int i = 0; i < wave_r; ++i)
            core += std::string(wave_ell, 'F') + std::string(wave_ell, 'B');
        core += std::string(wave_ell, 'F');
        core += "F";
    } else {
        for (const StairSegment& seg : segments) {
            if (!seg.is_wave) {
                core += std::string(seg.len, 'F');
            } else {
                for (int i = 0; i < seg.r; ++i)
                    core += std::string(seg.ell, 'B') + std::string(seg.ell, 'F');
                core += std::string(seg.ell, 'B');
            }
        }
    }
    return mirrored ? mirror_word(core) : core;
}

PathShape classify_path_shape(const OrientedPath& p) {
    PathShape shape;
    if (p.directed()) {
        shape.kind = PathShape::Kind::directed;
        shape.mirrored = p.word[0] == 'B';
        shape.segments = {{false, p.edge_count(), 0, 0}};
    } else if (auto w = try_wave(p.word)) {
        shape.kind = PathShape::Kind::wave;
        shape.wave_r = w->first;
        shape.wave_ell = w->second;
    } else if (auto stair = try_staircase(p)) {
        shape.kind = PathShape::Kind::staircase;
        shape.segments = std::move(*stair);
    } else {
        std::string mw = mirror_word(p.word);
        if (auto w2 = try_wave(mw)) {
            shape.kind = PathShape::Kind::wave;
            shape.mirrored = true;
            shape.wave_r = w2->first;
            shape.wave_ell = w2->second;
        } else if (auto stair2 = try_staircase(OrientedPath(mw))) {
            shape.kind = PathShape::Kind::staircase;
            shape.mirrored = true;
            shape.segments = std::move(*stair2);
        }
    }
    if (shape.kind != PathShape::Kind::other && shape.resynthesize() != p.word)
        throw std::logic_error("classify_path_shape: decomposition does not rebuild the word");
    return shape;
}

std::optional<OrientedPath> common_path(const OrientedPath& p1, const OrientedPath& p2,
                                        int max_len) {
    if (!p1.minimal || !p2.minimal)
        throw InputError("common_path: both paths must be minimal");
    if (!ascending(p1) || !ascending(p2))
        throw InputError("common_path: both paths must be written from their bottom vertex");
    if (p1.height != p2.height) throw InputError("common_path: height mismatch");

    int n1 = p1.edge_count();
    int n2 = p2.edge_count();
    auto moves = [](const OrientedPath& p, int u, bool fwd, int out[2]) {
        int cnt = 0;
        int n = p.edge_count();
        if (fwd) {
            if (u < n && p.word[u] == 'F') out[cnt++] = u + 1;
            if (u > 0 && p.word[u - 1] == 'B') out[cnt++] = u - 1;
        } else {
            if (u < n && p.word[u] == 'B') out[cnt++] = u + 1;
            if (u > 0 && p.word[u - 1] == 'F') out[cnt++] = u - 1;
        }
        return cnt;
    };

    int columns = n2 + 1;
    int states = (n1 + 1) * columns;
    std::vector<int> dist(states, -1);
    std::vector<int> parent(states, -1);
    std::vector<char> letter(states, 0);
    std::deque<int> queue;
    dist[0] = 0;
    queue.push_back(0);
    int target = n1 * columns + n2;
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        if (cur == target) break;
        if (dist[cur] >= max_len) continue;
        int u1 = cur / columns;
        int u2 = cur % columns;
        for (char ch : {'F', 'B'}) {
            int m1[2];
            int m2[2];
            int c1 = moves(p1, u1, ch == 'F', m1);
            int c2 = moves(p2, u2, ch == 'F', m2);
            for (int a = 0; a < c1; ++a)
                for (int b = 0; b < c2; ++b) {
                    int nxt = m1[a] * columns + m2[b];
                    if (dist[nxt] != -1) continue;
                    dist[nxt] = dist[cur] + 1;
                    parent[nxt] = cur;
                    letter[nxt] = ch;
                    queue.push_back(nxt);
                }
        }
    }
    if (dist[target] == -1) return std::nullopt;

    std::string word;
    std::vector<int> walk;
    for (int cur = target;; cur = parent[cur]) {
        walk.push_back(cur);
        if (cur == 0) break;
        word += letter[cur];
    }
    std::reverse(word.begin(), word.end());
    std::reverse(walk.begin(), walk.end());

    OrientedPath q(word);
    if (!q.minimal || q.height != p1.height)
        throw std::logic_error("common_path: joint walk is not a minimal path of full height");

    std::map<std::string, std::string> h1;
    std::map<std::string, std::string> h2;
    for (std::size_t i = 0; i < walk.size(); ++i) {
        h1[vertex_name(q, "v", static_cast<int>(i))] = vertex_name(p1, "v", walk[i] / columns);
        h2[vertex_name(q, "v", static_cast<int>(i))] = vertex_name(p2, "v", walk[i] % columns);
    }
    if (!verify_homomorphism(q.to_structure(), p1.to_structure(), h1) ||
        !verify_homomorphism(q.to_structure(), p2.to_structure(), h2))
        throw std::logic_error("common_path: projections are not homomorphisms");
    return q;
}

std::optional<NlWitness> nl_witness_search(const OrientedPath& b, const NlSearchLimits& limits) {
    Structure sb = b.to_structure();
    CoreLimits cl;
    cl.max_domain = static_cast<int>(sb.domain().size());
    cl.search = limits.search;
    CoreResult cr = core_of(sb, cl);
    if (cr.core.domain().size() != sb.domain().size())
        throw InputError("nl_witness_search: the path is not a core");

    for (int flip = 0; flip < 2; ++flip) {
        std::string word = flip ? mirror_word(b.word) : b.word;
        int len = static_cast<int>(word.size());
        for (int s = 0; s + 2 < len; ++s) {
            for (int i = s + 1; i + 1 < len; ++i) {
                OrientedPath p1(word.substr(s, i - s));
                if (!p1.minimal || !ascending(p1)) continue;
                int h = p1.height;
                Structure s1 = p1.to_structure();
                for (int e = i + 1; e < len; ++e) {
                    OrientedPath p2(word.substr(i, e - i));
                    if (p2.height > h) break;
                    if (!p2.minimal || !descending(p2) || p2.height != h) continue;
                    Structure s2 = p2.to_structure();
                    for (int t = e + 1; t <= len; ++t) {
                        OrientedPath p3(word.substr(e, t - e));
                        if (p3.height > h) break;
                        if (!p3.minimal || !ascending(p3) || p3.height != h) continue;
                        Structure s3 = p3.to_structure();
                        for (int length = h; length <= limits.max_q_len; ++length) {
                            std::uint64_t combos = length == 1 ? 1 : 1ull << (length - 1);
                            for (std::uint64_t mask = 0; mask < combos; ++mask) {
                                std::string wq = "F";
                                for (int u = 0; u < length - 1; ++u)
                                    wq += (mask >> (length - 2 - u)) & 1 ? 'F' : 'B';
                                OrientedPath q(wq);
                                if (!q.minimal || q.height != h || !ascending(q)) continue;
                                Structure sq = q.to_structure();
                                auto h1 = find_homomorphism(sq, s1, limits.search);
                                if (!h1) continue;
                                auto h3 = find_homomorphism(sq, s3, limits.search);
                                if (!h3) continue;
                                if (find_homomorphism(sq, s2, limits.search)) continue;
                                return NlWitness{s,         i, e, t, flip != 0, h, q,
                                                 h1->map, h3->map, true};
                            }
                        }
                    }
                }
            }
        }
    }
    return std::nullopt;
}

OrientedPath witness_frame(const OrientedPath& b, const NlWitness& w) {
    return w.flipped ? OrientedPath(mirror_word(b.word)) : b;
}

LeqGadget build_leq_gadget(const OrientedPath& b, const NlWitness& w) {
    OrientedPath frame = witness_frame(b, w);
    int len = frame.edge_count();
    if (w.band_start < 0 || w.band_start >= w.split_start || w.split_end <= w.split_start ||
        w.band_end <= w.split_end || w.band_end > len)
        throw InputError("build_leq_gadget: band indices out of range");
    OrientedPath p1(frame.word.substr(w.band_start, w.split_start - w.band_start));
    // The middle part falls across the band; re-read it from its high end so
    // all three parts rise and the common-path search applies.
    OrientedPath p2(mirror_word(
        frame.word.substr(w.split_start, w.split_end - w.split_start)));
    OrientedPath p3(frame.word.substr(w.split_end, w.band_end - w.split_end));
    if (!p1.minimal || !ascending(p1) || !p2.minimal || !ascending(p2) || !p3.minimal ||
        !ascending(p3) || p1.height != p2.height || p2.height != p3.height)
        throw InputError("build_leq_gadget: the band does not carve into rise/fall/rise parts");

    // A shortest joint walk never revisits a state, so the state count is a
    // safe length budget.
    auto budget = [](const OrientedPath& a, const OrientedPath& c) {
        return (a.edge_count() + 1) * (c.edge_count() + 1);
    };
    auto p23 = common_path(p2, p3, budget(p2, p3));
    if (!p23) throw ResourceError("build_leq_gadget: no common path for the outer pair");
    auto p12 = common_path(p1, p2, budget(p1, p2));
    if (!p12) throw ResourceError("build_leq_gadget: no common path for the first pair");
    auto p123 = common_path(*p12, p3, budget(*p12, p3));
    if (!p123) throw ResourceError("build_leq_gadget: no common path for all three parts");

    Structure sp = frame.to_structure("p");
    Structure sq = w.q.to_structure("q");
    Structure s23 = p23->to_structure("s");
    Structure s123 = p123->to_structure("r");

    auto identity_map = [](const Structure& s) {
        std::map<std::string, std::string> m;
        for (const auto& x : s.domain()) m[x] = x;
        return m;
    };
    auto rq = identity_map(sq);
    rq[vertex_name(w.q, "q", top_index(w.q))] = "top";
    auto r23 = identity_map(s23);
    r23[vertex_name(*p23, "s", top_index(*p23))] = "top";
    r23[vertex_name(*p23, "s", 0)] = vertex_name(frame, "p", w.split_end);
    auto r123 = identity_map(s123);
    r123[vertex_name(*p123, "r", top_index(*p123))] = "top";

    Structure g = union_structures(
        {sp, sq.renamed(rq), s23.renamed(r23), s123.renamed(r123)});

    LeqGadget out{g,
                  vertex_name(w.q, "q", 0),
                  vertex_name(*p123, "r", 0),
                  vertex_name(frame, "v", w.band_start),
                  vertex_name(frame, "v", w.split_end),
                  false,
                  {}};

    Structure target = frame.to_structure("v");
    SearchLimits lim;
    lim.max_nodes = 20'000'000;
    for (const auto& hom : all_homomorphisms(g, target, lim))
        out.projection.insert({hom.at(out.x), hom.at(out.y)});

    std::set<std::pair<std::string, std::string>> expected{
        {out.zero_vertex, out.zero_vertex},
        {out.zero_vertex, out.one_vertex},
        {out.one_vertex, out.one_vertex}};
    out.verified = out.projection == expected;
    return out;
}

namespace {

// Fragments of height exactly hh with anchored endpoint levels, bucketed by
// length. kind: 0 = bottom start / top end, 1 = top start / top end,
// 2 = top start / bottom end.
std::vector<std::vector<std::string>> anchored_fragments(int hh, int max_len, int kind) {
    std::vector<std::vector<std::string>> fams(max_len + 1);
    for (int length = 0; length <= max_len; ++length) {
        std::uint64_t combos = 1ull << length;
        for (std::uint64_t mask = 0; mask < combos; ++mask) {
            std::string word;
            int level = 0;
            int lo = 0;
            int hi = 0;
            for (int t = 0; t < length; ++t) {
                bool fwd = (mask >> (length - 1 - t)) & 1;
                word += fwd ? 'F' : 'B';
                level += fwd ? 1 : -1;
                lo = std::min(lo, level);
                hi = std::max(hi, level);
            }
            if (hi - lo != hh) continue;
            bool first_bottom = lo == 0;
            bool first_top = hi == 0;
            bool last_bottom = level == lo;
            bool last_top = level == hi;
            bool keep = kind == 0 ? first_bottom && last_top
                        : kind == 1 ? first_top && last_top
                                    : first_top && last_bottom;
            if (keep) fams[length].push_back(word);
        }
    }
    return fams;
}

} // namespace

WaveObstructions wave_obstructions(const OrientedPath& q, int max_len) {
    PathShape shape = classify_path_shape(q);
    bool usable = !shape.mirrored && (shape.kind == PathShape::Kind::wave ||
                                      shape.kind == PathShape::Kind::directed);
    if (!usable) throw InputError("wave_obstructions: input is not a bottom-up wave");

    WaveObstructions out;
    out.h = q.height - 2;
    int h = out.h;
    if (h < 1 || max_len < 3) return out;

    Structure sq = q.to_structure();
    SearchLimits lim;
    std::set<std::string> emitted;
    auto consider = [&](const std::string& word) {
        if (static_cast<int>(word.size()) > max_len || emitted.count(word)) return;
        OrientedPath cand(word);
        if (cand.height != h + 2 || !cand.minimal)
            throw std::logic_error("wave_obstructions: template produced a malformed candidate");
        if (find_homomorphism(cand.to_structure(), sq, lim)) return;
        emitted.insert(word);
        out.paths.push_back(std::move(cand));
    };

    auto up = anchored_fragments(h - 1, max_len - 3, 0);
    auto toptop = anchored_fragments(h - 1, max_len - 3, 1);
    auto topdown = anchored_fragments(h - 1, std::max(0, max_len - 5), 2);

    for (int lx = 0; lx + 3 <= max_len; ++lx)
        for (const auto& x : up[lx])
            for (int ly = 0; lx + ly + 3 <= max_len; ++ly)
                for (const auto& y : toptop[ly]) consider("F" + x + "F" + y + "F");

    for (int lx = 0; lx + 5 <= max_len; ++lx)
        for (const auto& x : up[lx])
            for (int ly = 0; lx + ly + 5 <= max_len; ++ly)
                for (const auto& y : topdown[ly])
                    for (int lz = 0; lx + ly + lz + 5 <= max_len; ++lz)
                        for (const auto& z : up[lz])
                            for (int lw = 0; lx + ly + lz + lw + 5 <= max_len; ++lw)
                                for (const auto& v : toptop[lw])
                                    consider("F" + x + "F" + y + "B" + z + "F" + v + "F");

    std::sort(out.paths.begin(), out.paths.end(),
              [](const OrientedPath& a, const OrientedPath& b) {
                  return a.word.size() != b.word.size() ? a.word.size() < b.word.size()
                                                        : a.word < b.word;
              });
    return out;
}

bool obstruction_set_covers(const WaveObstructions& obs, const OrientedPath& candidate,
                            const SearchLimits& limits) {
    if (candidate.height > obs.h + 2) return true;
    Structure sc = candidate.to_structure();
    for (const OrientedPath& o : obs.paths)
        if (find_homomorphism(o.to_structure(), sc, limits)) return true;
    return false;
}

bool is_rigid_path(const OrientedPath& p) {
    Structure s = p.to_structure();
    CoreLimits cl;
    cl.max_domain = static_cast<int>(s.domain().size());
    CoreResult cr = core_of(s, cl);
    if (cr.core.domain().size() != s.domain().size())
        throw InputError("is_rigid_path: the path is not a core");
    // On a core every endomorphism is an automorphism.
    return all_homomorphisms(s, s).size() == 1;
}

} // namespace cspb
