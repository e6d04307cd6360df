#include "cspb/pathscape.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "cspb/errors.hpp"

namespace cspb {

namespace {

std::string padded_index(int i, int width) {
    std::string s = std::to_string(i);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

std::set<std::string> domain_set(const Structure& s) {
    return {s.domain().begin(), s.domain().end()};
}

std::set<std::string> intersect(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::set<std::string> out;
    for (const auto& x : a)
        if (b.count(x)) out.insert(x);
    return out;
}

} // namespace

OrientedPath::OrientedPath(std::string w) : word(std::move(w)) {
    if (word.empty()) throw InputError("oriented path: the word must be nonempty");
    for (char ch : word)
        if (ch != 'F' && ch != 'B')
            throw InputError("oriented path: the word may contain only F and B");

    levels.assign(word.size() + 1, 0);
    for (std::size_t i = 0; i < word.size(); ++i)
        levels[i + 1] = levels[i] + (word[i] == 'F' ? 1 : -1);
    int lo = *std::min_element(levels.begin(), levels.end());
    for (int& v : levels) v -= lo;
    height = *std::max_element(levels.begin(), levels.end());

    int n = static_cast<int>(word.size());
    int min_count = 0;
    int max_count = 0;
    int argmin = -1;
    int argmax = -1;
    for (int i = 0; i <= n; ++i) {
        if (levels[i] == 0) {
            ++min_count;
            argmin = i;
        }
        if (levels[i] == height) {
            ++max_count;
            argmax = i;
        }
    }
    // Minimal: the unique bottom vertex is the source endpoint and the unique
    // top vertex is the sink endpoint.
    bool bottom_is_source =
        (argmin == 0 && word.front() == 'F') || (argmin == n && word.back() == 'B');
    bool top_is_sink = (argmax == 0 && word.front() == 'B') || (argmax == n && word.back() == 'F');
    minimal = min_count == 1 && max_count == 1 && bottom_is_source && top_is_sink;
}

bool OrientedPath::directed() const {
    return word.find('F') == std::string::npos || word.find('B') == std::string::npos;
}

Structure OrientedPath::to_structure(const std::string& prefix) const {
    int n = vertex_count();
    int width = static_cast<int>(std::to_string(n - 1).size());
    std::vector<std::string> names;
    names.reserve(n);
    for (int i = 0; i < n; ++i) names.push_back(prefix + padded_index(i, width));

    std::set<Tuple> edges;
    for (int i = 0; i < edge_count(); ++i) {
        if (word[i] == 'F')
            edges.insert({names[i], names[i + 1]});
        else
            edges.insert({names[i + 1], names[i]});
    }
    return Structure(Vocabulary({{"E", 2}}), names, {{"E", std::move(edges)}});
}

Structure represented_structure(const PathRepresentation& rep) {
    if (rep.bags.empty()) throw InputError("representation: no bags");
    return union_structures(rep.bags);
}

RepReport validate_representation(const PathRepresentation& rep, const Structure* whole) {
    RepReport report;
    auto flag = [&](std::string msg) {
        report.ok = false;
        report.diagnostics.push_back(std::move(msg));
    };

    if (rep.bags.empty()) {
        flag("no bags");
        return report;
    }
    if (rep.j < 0 || rep.k < 0 || rep.j > rep.k)
        flag("parameters must satisfy 0 <= j <= k");

    bool vocab_ok = true;
    for (std::size_t i = 1; i < rep.bags.size(); ++i) {
        if (!rep.bags[i].vocab().same_symbols(rep.bags[0].vocab())) {
            flag("bag " + std::to_string(i) + ": vocabulary differs from bag 0");
            vocab_ok = false;
        }
    }

    for (std::size_t i = 0; i < rep.bags.size(); ++i) {
        if (static_cast<int>(rep.bags[i].domain().size()) > rep.k)
            flag("bag " + std::to_string(i) + " has " +
                 std::to_string(rep.bags[i].domain().size()) + " elements, above k = " +
                 std::to_string(rep.k));
    }
    for (std::size_t i = 0; i + 1 < rep.bags.size(); ++i) {
        auto common = intersect(domain_set(rep.bags[i]), domain_set(rep.bags[i + 1]));
        if (static_cast<int>(common.size()) > rep.j)
            flag("bags " + std::to_string(i) + " and " + std::to_string(i + 1) + " share " +
                 std::to_string(common.size()) + " elements, above j = " + std::to_string(rep.j));
    }

    std::map<std::string, std::vector<int>> where;
    for (std::size_t i = 0; i < rep.bags.size(); ++i)
        for (const auto& x : rep.bags[i].domain()) where[x].push_back(static_cast<int>(i));
    for (const auto& [x, idx] : where) {
        for (std::size_t t = 0; t + 1 < idx.size(); ++t) {
            if (idx[t + 1] != idx[t] + 1) {
                flag("element " + x + " is missing from bag " + std::to_string(idx[t] + 1) +
                     " between occurrences");
                break;
            }
        }
    }

    if (whole != nullptr && vocab_ok) {
        Structure uni = union_structures(rep.bags);
        if (!(uni == *whole)) flag("the union of the bags differs from the given structure");
    }
    return report;
}

namespace {

// Minimal cursor over the bags section; keeps line/column for errors.
struct BagCursor {
    const std::string& text;
    std::size_t pos;
    int line;
    int col;

    void advance() {
        if (text[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }
    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    void skip_ws() {
        while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r' || peek() == '\n'))
            advance();
    }
};

} // namespace

PathRepresentation parse_representation(const std::string& text) {
    return parse_representation(text, nullptr);
}

PathRepresentation parse_representation(const std::string& text, Structure* whole_out) {
    // Locate the "bags:" line; everything before it is a structure file.
    std::size_t pos = 0;
    int line_no = 1;
    std::size_t bags_pos = std::string::npos;
    int bags_line = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::size_t first = text.find_first_not_of(" \t\r", pos);
        if (first != std::string::npos && first < eol && text.compare(first, 5, "bags:") == 0) {
            bags_pos = first;
            bags_line = line_no;
            break;
        }
        pos = eol + 1;
        ++line_no;
    }
    if (bags_pos == std::string::npos)
        throw ParseError("expected a bags: line after the structure", line_no, 1);

    Structure whole = parse_structure(text.substr(0, bags_pos));
    if (whole_out != nullptr) *whole_out = whole;

    std::size_t nl = text.rfind('\n', bags_pos);
    std::size_t line_start = nl == std::string::npos ? 0 : nl + 1;
    BagCursor cur{text, bags_pos + 5, bags_line,
                  static_cast<int>(bags_pos - line_start) + 6};
    std::vector<std::set<std::string>> bag_sets;
    cur.skip_ws();
    while (!cur.done()) {
        if (cur.peek() == '#') {
            while (!cur.done() && cur.peek() != '\n') cur.advance();
            cur.skip_ws();
            continue;
        }
        if (cur.peek() != '[')
            throw ParseError("expected [ to open a bag", cur.line, cur.col);
        cur.advance();
        std::set<std::string> bag;
        while (true) {
            cur.skip_ws();
            if (cur.done()) throw ParseError("unterminated bag", cur.line, cur.col);
            if (cur.peek() == ']') {
                cur.advance();
                break;
            }
            std::string name;
            int at_line = cur.line;
            int at_col = cur.col;
            while (!cur.done() && cur.peek() != ' ' && cur.peek() != '\t' && cur.peek() != '\n' &&
                   cur.peek() != '\r' && cur.peek() != ']') {
                name += cur.peek();
                cur.advance();
            }
            if (!is_valid_element_name(name))
                throw ParseError("bad element name in bag", at_line, at_col);
            if (!whole.has_element(name))
                throw ParseError("bag element " + name + " is not in the domain", at_line, at_col);
            bag.insert(name);
        }
        bag_sets.push_back(std::move(bag));
        cur.skip_ws();
    }
    if (bag_sets.empty())
        throw ParseError("expected at least one bag", cur.line, cur.col);

    PathRepresentation rep;
    for (const auto& bag : bag_sets) rep.bags.push_back(whole.induced(bag));
    for (const auto& bag : bag_sets)
        rep.k = std::max(rep.k, static_cast<int>(bag.size()));
    for (std::size_t i = 0; i + 1 < bag_sets.size(); ++i)
        rep.j = std::max(rep.j, static_cast<int>(intersect(bag_sets[i], bag_sets[i + 1]).size()));
    return rep;
}

std::string print_representation(const PathRepresentation& rep) {
    std::ostringstream out;
    out << print_structure(represented_structure(rep));
    out << "bags:";
    for (const auto& bag : rep.bags) {
        out << " [";
        bool first = true;
        for (const auto& x : bag.domain()) {
            if (!first) out << ' ';
            out << x;
            first = false;
        }
        out << ']';
    }
    out << '\n';
    return out.str();
}

ZigzagResult zigzag(const PathRepresentation& rep, const OrientedPath& p) {
    RepReport rr = validate_representation(rep);
    if (!rr.ok) throw InputError("zigzag: invalid representation: " + rr.diagnostics.front());
    if (!p.minimal) throw InputError("zigzag: the path must be minimal");
    if (p.levels[0] != 0) throw InputError("zigzag: the path must start at its bottom vertex");
    if (p.height != static_cast<int>(rep.bags.size()))
        throw InputError("zigzag: path height " + std::to_string(p.height) +
                         " must equal the number of bags " + std::to_string(rep.bags.size()));

    ZigzagResult z;
    z.j = rep.j;
    z.k = rep.k;
    std::vector<std::map<std::string, std::string>> names; // original -> copy, per edge

    for (int i = 0; i < p.edge_count(); ++i) {
        const Structure& orig = rep.bags[p.edge_level(i)];
        std::map<std::string, std::string> nm;
        if (i == 0) {
            for (const auto& x : orig.domain()) nm[x] = x + "@0";
        } else {
            // The shared vertex with the previous edge sits at level m + 1;
            // copies of the boundary between bags m and m+1 are reused.
            int m = p.levels[i] - 1;
            auto glue = intersect(domain_set(rep.bags[m]), domain_set(rep.bags[m + 1]));
            for (const auto& x : orig.domain()) {
                if (glue.count(x)) {
                    auto prev = names.back().find(x);
                    if (prev == names.back().end())
                        throw std::logic_error("zigzag: boundary element missing from the previous bag");
                    nm[x] = prev->second;
                } else {
                    nm[x] = x + "@" + std::to_string(i);
                }
            }
            z.pair_levels.push_back(m);
        }
        z.bags.push_back(orig.renamed(nm));
        std::map<std::string, std::string> inv;
        for (const auto& [x, cp] : nm) inv[cp] = x;
        z.isos.push_back(std::move(inv));
        names.push_back(std::move(nm));
    }
    return z;
}

Homomorphism projection_hom(const ZigzagResult& z, const PathRepresentation& rep) {
    std::map<std::string, std::string> map;
    for (const auto& iso : z.isos) {
        for (const auto& [cp, x] : iso) {
            auto [it, inserted] = map.emplace(cp, x);
            if (!inserted && it->second != x)
                throw std::logic_error("projection_hom: one copy with two originals");
        }
    }
    Homomorphism h{union_structures(z.bags), represented_structure(rep), std::move(map)};
    std::vector<std::string> diag;
    if (!verify_homomorphism(h, &diag))
        throw std::logic_error("projection_hom: projection is not a homomorphism: " + diag.front());
    return h;
}

FilterReport validate_filter(const Filter& f, const PathRepresentation& rep) {
    FilterReport report;
    auto flag = [&](std::string msg) {
        report.ok = false;
        report.diagnostics.push_back(std::move(msg));
    };

    int n = static_cast<int>(rep.bags.size());
    if (f.c < 0 || f.d < 0) flag("parameters must satisfy c >= 0 and d >= 0");
    if (static_cast<int>(f.delimiters.size()) > f.c)
        flag("more than c = " + std::to_string(f.c) + " delimiters");
    for (std::size_t i = 0; i < f.delimiters.size(); ++i) {
        auto [s, t] = f.delimiters[i];
        if (s < 0 || t < s || t >= n)
            flag("delimiter " + std::to_string(i) + " is out of range");
    }
    for (std::size_t i = 0; i + 1 < f.delimiters.size(); ++i) {
        if (f.delimiters[i].second + 2 > f.delimiters[i + 1].first)
            flag("delimiters " + std::to_string(i) + " and " + std::to_string(i + 1) +
                 " must leave a gap of at least one level");
    }
    for (std::size_t i = 0; i < f.delimiters.size(); ++i) {
        auto [s, t] = f.delimiters[i];
        if (s < 0 || t < s || t >= n) continue;
        std::set<std::string> covered;
        for (int ell = s; ell <= t; ++ell)
            for (const auto& x : rep.bags[ell].domain()) covered.insert(x);
        if (static_cast<int>(covered.size()) > f.d)
            flag("delimiter " + std::to_string(i) + " covers " + std::to_string(covered.size()) +
                 " elements, above d = " + std::to_string(f.d));
    }
    return report;
}

bool obeys_filter(const OrientedPath& p, const Filter& f) {
    for (const auto& [s, t] : f.delimiters) {
        std::vector<int> hits;
        for (int i = 0; i < p.edge_count(); ++i) {
            int lev = p.edge_level(i);
            if (lev >= s && lev <= t) hits.push_back(i);
        }
        if (hits.empty()) continue;
        for (std::size_t a = 0; a + 1 < hits.size(); ++a)
            if (hits[a + 1] != hits[a] + 1) return false;
        char dir = p.word[hits.front()];
        for (int i : hits)
            if (p.word[i] != dir) return false;
    }
    return true;
}

PathRepresentation regroup(const PathRepresentation& rep, const Filter& f) {
    RepReport rr = validate_representation(rep);
    if (!rr.ok) throw InputError("regroup: invalid representation: " + rr.diagnostics.front());
    FilterReport fr = validate_filter(f, rep);
    if (!fr.ok) throw InputError("regroup: invalid filter: " + fr.diagnostics.front());

    int n = static_cast<int>(rep.bags.size());
    Structure whole = represented_structure(rep);

    // Segments are the maximal stretches between delimiters; the first and
    // last may be empty when a delimiter touches the boundary.
    std::vector<std::pair<int, int>> segments;
    std::set<std::string> t0;
    int prev = 0;
    for (const auto& [s, t] : f.delimiters) {
        segments.push_back({prev, s - 1});
        for (int ell = s; ell <= t; ++ell)
            for (const auto& x : rep.bags[ell].domain()) t0.insert(x);
        prev = t + 1;
    }
    segments.push_back({prev, n - 1});

    int longest = 0;
    std::vector<std::set<std::string>> piece_elems;
    piece_elems.push_back(t0);
    for (const auto& [lo, hi] : segments) {
        longest = std::max(longest, hi - lo + 1);
        std::set<std::string> u;
        for (int ell = lo; ell <= hi; ++ell)
            for (const auto& x : rep.bags[ell].domain()) u.insert(x);
        piece_elems.push_back(std::move(u));
    }

    // Elements shared between different pieces would break persistence once
    // the segments run in parallel, so they ride along in every bag.
    std::set<std::string> overlap;
    for (std::size_t a = 0; a < piece_elems.size(); ++a)
        for (std::size_t b = a + 1; b < piece_elems.size(); ++b)
            for (const auto& x : intersect(piece_elems[a], piece_elems[b])) overlap.insert(x);

    std::vector<std::set<std::string>> out_sets;
    {
        std::set<std::string> first = t0;
        first.insert(overlap.begin(), overlap.end());
        out_sets.push_back(std::move(first));
    }
    for (int col = 0; col < longest; ++col) {
        std::set<std::string> bag = overlap;
        for (const auto& [lo, hi] : segments) {
            if (lo + col > hi) continue;
            for (const auto& x : rep.bags[lo + col].domain()) bag.insert(x);
        }
        out_sets.push_back(std::move(bag));
    }

    PathRepresentation out;
    for (const auto& bag : out_sets) {
        if (bag.empty()) continue;
        out.bags.push_back(whole.induced(bag));
    }
    if (out.bags.empty()) out.bags.push_back(whole.induced({}));

    for (const auto& bag : out.bags)
        out.k = std::max(out.k, static_cast<int>(bag.domain().size()));
    for (std::size_t i = 0; i + 1 < out.bags.size(); ++i)
        out.j = std::max(out.j, static_cast<int>(
                                    intersect(domain_set(out.bags[i]), domain_set(out.bags[i + 1]))
                                        .size()));

    long long bound = static_cast<long long>(f.c) * f.d +
                      static_cast<long long>(rep.k) * (f.c + 1) +
                      static_cast<long long>(overlap.size());
    if (out.k > bound)
        throw std::logic_error("regroup: output bag size exceeds the guaranteed bound");
    RepReport check = validate_representation(out, &whole);
    if (!check.ok)
        throw std::logic_error("regroup: output is not a valid representation: " +
                               check.diagnostics.front());
    return out;
}

namespace {

struct PathwidthSearch {
    int n = 0;
    int j = 0;
    int k = 0;
    std::vector<std::uint32_t> blob_masks;
    std::vector<int> candidates;
    std::int64_t nodes = 0;
    std::int64_t max_nodes = 0;
    std::set<std::tuple<int, int, std::uint32_t>> failed;
    std::vector<int> trail;

    bool covered(std::uint32_t uncov, int bag, std::uint32_t* next) const {
        std::uint32_t rest = 0;
        for (std::size_t b = 0; b < blob_masks.size(); ++b) {
            if (!(uncov & (1u << b))) continue;
            if ((blob_masks[b] & ~static_cast<std::uint32_t>(bag)) != 0) rest |= 1u << b;
        }
        *next = rest;
        return rest != uncov;
    }

    bool dfs(int prev_bag, int seen, std::uint32_t uncov) {
        if (seen == (1 << n) - 1 && uncov == 0) return true;
        if (++nodes > max_nodes) throw ResourceError("decide_pathwidth: node budget exhausted");
        auto key = std::make_tuple(prev_bag, seen, uncov);
        if (failed.count(key)) return false;

        for (int bag : candidates) {
            // Only currently live elements may recur, and adjacent bags may
            // share at most j elements.
            if ((bag & seen & ~prev_bag) != 0) continue;
            if (std::popcount(static_cast<unsigned>(bag & prev_bag)) > j) continue;
            std::uint32_t next_uncov;
            bool progress = covered(uncov, bag, &next_uncov);
            if ((bag & ~seen) == 0 && !progress) continue;
            trail.push_back(bag);
            if (dfs(bag, seen | bag, next_uncov)) return true;
            trail.pop_back();
        }
        failed.insert(key);
        return false;
    }
};

} // namespace

std::optional<PathRepresentation> decide_pathwidth(const Structure& s, int j, int k,
                                                   const PathwidthLimits& limits) {
    if (j < 0 || k < 1 || j > k)
        throw InputError("decide_pathwidth: parameters must satisfy 0 <= j <= k and k >= 1");
    int n = static_cast<int>(s.domain().size());
    if (n > limits.max_domain || limits.max_domain > 20)
        throw ResourceError("decide_pathwidth: domain exceeds the search budget");

    PathwidthSearch search;
    search.n = n;
    search.j = j;
    search.k = k;
    search.max_nodes = limits.max_nodes;

    std::map<std::string, int> index;
    for (int i = 0; i < n; ++i) index[s.domain()[i]] = i;

    std::set<std::uint32_t> blob_set;
    for (const auto& [name, tuples] : s.relations()) {
        (void)name;
        for (const auto& t : tuples) {
            std::uint32_t mask = 0;
            for (const auto& x : t) mask |= 1u << index.at(x);
            if (mask != 0) blob_set.insert(mask);
        }
    }
    for (std::uint32_t mask : blob_set) {
        if (std::popcount(mask) > k) return std::nullopt;
        search.blob_masks.push_back(mask);
    }
    if (static_cast<int>(search.blob_masks.size()) > limits.max_blobs)
        throw ResourceError("decide_pathwidth: too many distinct tuple supports");

    if (n == 0) return PathRepresentation{{s}, j, k};

    for (int bag = 0; bag < (1 << n); ++bag)
        if (std::popcount(static_cast<unsigned>(bag)) <= k) search.candidates.push_back(bag);

    std::uint32_t all_blobs = search.blob_masks.empty()
                                  ? 0u
                                  : (search.blob_masks.size() == 32
                                         ? ~0u
                                         : (1u << search.blob_masks.size()) - 1u);
    if (!search.dfs(0, 0, all_blobs)) return std::nullopt;

    PathRepresentation rep;
    rep.j = j;
    rep.k = k;
    for (int bag : search.trail) {
        std::set<std::string> keep;
        for (int i = 0; i < n; ++i)
            if (bag & (1 << i)) keep.insert(s.domain()[i]);
        rep.bags.push_back(s.induced(keep));
    }
    RepReport check = validate_representation(rep, &s);
    if (!check.ok)
        throw std::logic_error("decide_pathwidth: found sequence fails validation: " +
                               check.diagnostics.front());
    return rep;
}

std::optional<NWindow> find_n_digraph(const OrientedPath& p) {
    if (!p.minimal) throw InputError("find_n_digraph: the path must be minimal");
    if (p.directed()) return std::nullopt;

    int len = p.edge_count();
    auto run_is = [&](int from, int count, char ch) {
        for (int i = from; i < from + count; ++i)
            if (p.word[i] != ch) return false;
        return true;
    };
    for (int t = 0; t < len; ++t) {
        for (int s = 1; t + 3 * s <= len; ++s) {
            char a = p.word[t];
            char b = a == 'F' ? 'B' : 'F';
            if (run_is(t, s, a) && run_is(t + s, s, b) && run_is(t + 2 * s, s, a))
                return NWindow{t, s};
        }
    }
    throw std::logic_error("find_n_digraph: non-directed minimal path without a window");
}

MaltsevStep maltsev_unzigzag(const PathRepresentation& rep, const OrientedPath& p,
                             const Homomorphism& hom, const Operation& m) {
    if (!is_maltsev(m)) throw InputError("maltsev_unzigzag: the operation is not Maltsev");
    if (m.domain() != hom.target.domain())
        throw InputError("maltsev_unzigzag: the operation domain differs from the target domain");
    if (!is_polymorphism(m, hom.target))
        throw InputError("maltsev_unzigzag: the operation does not preserve the target");

    ZigzagResult z = zigzag(rep, p);
    Structure unrolled = union_structures(z.bags);
    if (!(hom.source == unrolled))
        throw InputError("maltsev_unzigzag: the homomorphism source is not the unrolled path");
    if (!verify_homomorphism(hom))
        throw InputError("maltsev_unzigzag: the given map is not a homomorphism");

    auto window = find_n_digraph(p);
    if (!window) throw InputError("maltsev_unzigzag: the path is already directed");
    int t = window->start;
    int s = window->s;

    OrientedPath pp(p.word.substr(0, t) + std::string(s, p.word[t]) + p.word.substr(t + 3 * s));
    if (!pp.minimal || pp.height != p.height)
        throw std::logic_error("maltsev_unzigzag: window removal broke minimality");

    ZigzagResult zp = zigzag(rep, pp);

    std::vector<std::map<std::string, std::string>> names(z.isos.size());
    for (std::size_t i = 0; i < z.isos.size(); ++i)
        for (const auto& [cp, x] : z.isos[i]) names[i][x] = cp;

    std::map<std::string, std::string> gamma;
    auto assign = [&](const std::string& d, const std::string& v) {
        auto [it, inserted] = gamma.emplace(d, v);
        if (!inserted && it->second != v)
            throw std::logic_error("maltsev_unzigzag: inconsistent value on a glued element");
    };

    for (std::size_t ip = 0; ip < zp.bags.size(); ++ip) {
        int i = static_cast<int>(ip);
        if (i >= t && i < t + s) {
            // Window bag: combine the three copies living at the same level,
            // leftmost first.
            int idx = i - t;
            int i1 = t + idx;
            int i2 = t + 2 * s - 1 - idx;
            int i3 = t + 2 * s + idx;
            for (const auto& [d, x] : zp.isos[ip]) {
                const std::string& d1 = names[i1].at(x);
                const std::string& d2 = names[i2].at(x);
                const std::string& d3 = names[i3].at(x);
                assign(d, m.apply({hom.map.at(d1), hom.map.at(d2), hom.map.at(d3)}));
            }
        } else {
            int src = i < t ? i : i + 2 * s;
            for (const auto& [d, x] : zp.isos[ip])
                assign(d, hom.map.at(names[src].at(x)));
        }
    }

    Homomorphism out{union_structures(zp.bags), hom.target, std::move(gamma)};
    std::vector<std::string> diag;
    if (!verify_homomorphism(out, &diag))
        throw std::logic_error("maltsev_unzigzag: rebuilt map is not a homomorphism: " +
                               diag.front());
    return MaltsevStep{std::move(pp), std::move(out)};
}

Homomorphism maltsev_unzigzag_full(const PathRepresentation& rep, const OrientedPath& p,
                                   const Homomorphism& hom, const Operation& m) {
    OrientedPath cur = p;
    Homomorphism cur_hom = hom;
    if (cur.directed()) {
        ZigzagResult z = zigzag(rep, cur);
        if (!(cur_hom.source == union_structures(z.bags)))
            throw InputError("maltsev_unzigzag_full: the homomorphism source is not the unrolled path");
        if (!verify_homomorphism(cur_hom))
            throw InputError("maltsev_unzigzag_full: the given map is not a homomorphism");
    }
    while (!cur.directed()) {
        MaltsevStep step = maltsev_unzigzag(rep, cur, cur_hom, m);
        cur = std::move(step.p_prime);
        cur_hom = std::move(step.hom);
    }

    // A directed unrolling projects bijectively onto the represented
    // structure, so the map pulls back along the inverse projection.
    ZigzagResult z = zigzag(rep, cur);
    Homomorphism proj = projection_hom(z, rep);
    std::map<std::string, std::string> back;
    for (const auto& [cp, x] : proj.map) {
        auto [it, inserted] = back.emplace(x, cp);
        if (!inserted && it->second != cp)
            throw std::logic_error("maltsev_unzigzag_full: directed unrolling is not injective");
    }
    std::map<std::string, std::string> final_map;
    for (const auto& [x, cp] : back) final_map[x] = cur_hom.map.at(cp);

    Homomorphism out{proj.target, hom.target, std::move(final_map)};
    std::vector<std::string> diag;
    if (!verify_homomorphism(out, &diag))
        throw std::logic_error("maltsev_unzigzag_full: final map is not a homomorphism: " +
                               diag.front());
    return out;
}

} // namespace cspb
