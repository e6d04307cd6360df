#pragma once

// Brute-force reference implementations the tests compare against. These
// deliberately share no code with the library: plain adjacency scans and
// odometer enumeration only.

#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cspb/structure.hpp"

namespace oracle {

// Directed reachability from any S-marked element to any T-marked element,
// by BFS over the E relation.
inline bool st_reachable(const cspb::Structure& a) {
    std::set<std::string> frontier;
    for (const auto& t : a.relation("S")) frontier.insert(t[0]);
    std::set<std::string> seen = frontier;
    std::queue<std::string> q;
    for (const auto& e : frontier) q.push(e);
    while (!q.empty()) {
        std::string u = q.front();
        q.pop();
        for (const auto& t : a.relation("E"))
            if (t[0] == u && !seen.count(t[1])) {
                seen.insert(t[1]);
                q.push(t[1]);
            }
    }
    for (const auto& t : a.relation("T"))
        if (seen.count(t[0])) return true;
    return false;
}

// Reachability ignoring edge direction.
inline bool st_reachable_undirected(const cspb::Structure& a) {
    std::set<std::string> seen;
    for (const auto& t : a.relation("S")) seen.insert(t[0]);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& t : a.relation("E")) {
            if (seen.count(t[0]) && !seen.count(t[1])) seen.insert(t[1]), grew = true;
            if (seen.count(t[1]) && !seen.count(t[0])) seen.insert(t[0]), grew = true;
        }
    }
    for (const auto& t : a.relation("T"))
        if (seen.count(t[0])) return true;
    return false;
}

// Every map a -> b checked tuple by tuple; no pruning, no search order
// assumptions.
inline std::vector<std::map<std::string, std::string>> all_homs(const cspb::Structure& a,
                                                                const cspb::Structure& b) {
    std::vector<std::map<std::string, std::string>> out;
    const auto& dom = a.domain();
    const auto& codom = b.domain();
    if (dom.empty()) {
        out.push_back({});
        return out;
    }
    if (codom.empty()) return out;
    std::vector<std::size_t> pick(dom.size(), 0);
    while (true) {
        std::map<std::string, std::string> m;
        for (std::size_t i = 0; i < dom.size(); ++i) m[dom[i]] = codom[pick[i]];
        bool ok = true;
        for (const auto& [rel, tuples] : a.relations()) {
            for (const auto& t : tuples) {
                cspb::Tuple image;
                for (const auto& e : t) image.push_back(m.at(e));
                if (!b.relation(rel).count(image)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
        }
        if (ok) out.push_back(std::move(m));
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == codom.size()) pick[i++] = 0;
        if (i == pick.size()) break;
    }
    return out;
}

inline bool hom_exists(const cspb::Structure& a, const cspb::Structure& b) {
    return !all_homs(a, b).empty();
}

// Digraph on n vertices "1".."n" from an edge bitmask over the n*n ordered
// pairs in row-major order, with S and T chosen by their own bitmasks
// (bit i-1 marks vertex i).
inline cspb::Structure mask_digraph_st(int n, std::uint64_t emask, unsigned smask,
                                       unsigned tmask) {
    cspb::Vocabulary voc{{{"E", 2}, {"S", 1}, {"T", 1}}};
    std::vector<std::string> dom;
    for (int i = 1; i <= n; ++i) dom.push_back(std::to_string(i));
    std::set<cspb::Tuple> edges, src, dst;
    int bit = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j, ++bit)
            if (emask >> bit & 1) edges.insert({std::to_string(i), std::to_string(j)});
    for (int i = 1; i <= n; ++i) {
        if (smask >> (i - 1) & 1) src.insert({std::to_string(i)});
        if (tmask >> (i - 1) & 1) dst.insert({std::to_string(i)});
    }
    return cspb::Structure(voc, dom, {{"E", edges}, {"S", src}, {"T", dst}});
}

// The fixed-endpoint special case S = {1}, T = {n}.
inline cspb::Structure mask_digraph(int n, std::uint64_t mask) {
    return mask_digraph_st(n, mask, 1u, 1u << (n - 1));
}

// Whether the oriented path written by `word` maps into the E relation of
// `target`: forward image sets along the word, no backtracking machinery.
inline bool path_maps_into(const std::string& word, const cspb::Structure& target) {
    std::set<std::string> cur(target.domain().begin(), target.domain().end());
    for (char ch : word) {
        std::set<std::string> next;
        for (const auto& t : target.relation("E")) {
            if (ch == 'F' && cur.count(t[0])) next.insert(t[1]);
            if (ch == 'B' && cur.count(t[1])) next.insert(t[0]);
        }
        cur = std::move(next);
        if (cur.empty()) return false;
    }
    return true;
}

} // namespace oracle
