#include "cspb/hom_search.hpp"

#include <algorithm>
#include <cstddef>

namespace cspb {

namespace {

// Index-based view shared by the searches below.
struct SearchSpace {
    const Structure& a;
    const Structure& b;
    std::vector<std::string> avars;          // a.domain order
    std::vector<std::string> bvals;          // b.domain order
    std::map<std::string, int> aindex, bindex;
    // Tuples as index vectors, grouped per symbol for both sides.
    struct Rel {
        std::string name;
        std::vector<std::vector<int>> atuples;
        std::set<std::vector<int>> btuples;
    };
    std::vector<Rel> rels;
    // For pruning: per a-element, tuples that mention it.
    std::vector<std::vector<std::pair<int, int>>> touching; // (rel idx, tuple idx)

    explicit SearchSpace(const Structure& a_, const Structure& b_) : a(a_), b(b_) {
        if (!a.vocab().same_symbols(b.vocab()))
            throw InputError("find_homomorphism: structures use different vocabularies");
        avars = a.domain();
        bvals = b.domain();
        for (std::size_t i = 0; i < avars.size(); ++i) aindex[avars[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < bvals.size(); ++i) bindex[bvals[i]] = static_cast<int>(i);
        touching.resize(avars.size());
        for (const auto& [name, atuples] : a.relations()) {
            Rel r;
            r.name = name;
            for (const auto& t : atuples) {
                std::vector<int> idx;
                idx.reserve(t.size());
                for (const auto& e : t) idx.push_back(aindex.at(e));
                r.atuples.push_back(std::move(idx));
            }
            for (const auto& t : b.relation(name)) {
                std::vector<int> idx;
                idx.reserve(t.size());
                for (const auto& e : t) idx.push_back(bindex.at(e));
                r.btuples.insert(std::move(idx));
            }
            int ri = static_cast<int>(rels.size());
            for (std::size_t ti = 0; ti < r.atuples.size(); ++ti)
                for (int v : r.atuples[ti]) touching[v].emplace_back(ri, static_cast<int>(ti));
            rels.push_back(std::move(r));
        }
        for (auto& t : touching) {
            std::sort(t.begin(), t.end());
            t.erase(std::unique(t.begin(), t.end()), t.end());
        }
    }

    // Initial candidate sets from unary relations.
    std::vector<std::vector<char>> unary_candidates() const {
        std::vector<std::vector<char>> cand(avars.size(), std::vector<char>(bvals.size(), 1));
        for (const auto& r : rels) {
            for (const auto& t : r.atuples) {
                if (t.size() != 1) continue;
                for (std::size_t v = 0; v < bvals.size(); ++v)
                    if (!r.btuples.count({static_cast<int>(v)})) cand[t[0]][v] = 0;
            }
        }
        return cand;
    }

    // Check every tuple touching `var` that is now fully assigned, and
    // narrow candidates of tuples with exactly one unassigned position.
    bool consistent_after(int var, std::vector<int>& assign,
                          std::vector<std::vector<char>>& cand) const {
        for (auto [ri, ti] : touching[var]) {
            const auto& t = rels[ri].atuples[ti];
            int unassigned = -1;
            int unassigned_pos = -1;
            for (std::size_t p = 0; p < t.size(); ++p) {
                if (assign[t[p]] < 0) {
                    if (unassigned >= 0 && unassigned != t[p]) {
                        unassigned = -2; // two or more distinct unassigned vars
                        break;
                    }
                    unassigned = t[p];
                    unassigned_pos = static_cast<int>(p);
                }
            }
            if (unassigned == -2) continue;
            if (unassigned == -1) {
                std::vector<int> image(t.size());
                for (std::size_t p = 0; p < t.size(); ++p) image[p] = assign[t[p]];
                if (!rels[ri].btuples.count(image)) return false;
                continue;
            }
            // Narrow the lone unassigned variable (it may occupy several
            // positions of the tuple; require a consistent value).
            (void)unassigned_pos;
            auto& c = cand[unassigned];
            bool any = false;
            for (std::size_t v = 0; v < c.size(); ++v) {
                if (!c[v]) continue;
                std::vector<int> image(t.size());
                bool ok = true;
                for (std::size_t p = 0; p < t.size(); ++p) {
                    int av = t[p];
                    image[p] = (assign[av] >= 0) ? assign[av] : static_cast<int>(v);
                    if (assign[av] < 0 && av != unassigned) ok = false;
                }
                if (ok && !rels[ri].btuples.count(image)) ok = false;
                if (!ok)
                    c[v] = 0;
                else
                    any = true;
            }
            if (!any) return false;
        }
        return true;
    }
};

struct Searcher {
    const SearchSpace& sp;
    std::int64_t budget;
    std::int64_t nodes = 0;
    bool enumerate_all = false;
    std::vector<std::map<std::string, std::string>>* sink = nullptr;

    bool run(std::vector<int>& assign, std::vector<std::vector<char>>& cand) {
        if (++nodes > budget)
            throw ResourceError("homomorphism search exceeded node budget of " +
                                std::to_string(budget));
        int var = -1;
        for (std::size_t i = 0; i < assign.size(); ++i)
            if (assign[i] < 0) {
                var = static_cast<int>(i);
                break;
            }
        if (var < 0) {
            if (sink) {
                std::map<std::string, std::string> m;
                for (std::size_t i = 0; i < assign.size(); ++i)
                    m[sp.avars[i]] = sp.bvals[assign[i]];
                sink->push_back(std::move(m));
            }
            return !enumerate_all;
        }
        for (std::size_t v = 0; v < sp.bvals.size(); ++v) {
            if (!cand[var][v]) continue;
            assign[var] = static_cast<int>(v);
            auto saved = cand;
            if (sp.consistent_after(var, assign, cand)) {
                if (run(assign, cand)) return true;
            }
            cand = std::move(saved);
            assign[var] = -1;
        }
        return false;
    }
};

std::optional<std::map<std::string, std::string>> search_one(
    const Structure& a, const Structure& b, const std::map<std::string, std::string>& pins,
    const SearchLimits& limits) {
    SearchSpace sp(a, b);
    std::vector<int> assign(sp.avars.size(), -1);
    auto cand = sp.unary_candidates();
    for (const auto& [x, v] : pins) {
        auto ai = sp.aindex.find(x);
        if (ai == sp.aindex.end()) throw InputError("pinned element '" + x + "' not in source");
        auto bi = sp.bindex.find(v);
        if (bi == sp.bindex.end()) throw InputError("pinned image '" + v + "' not in target");
        if (!cand[ai->second][bi->second]) return std::nullopt;
        assign[ai->second] = bi->second;
    }
    for (const auto& [x, v] : pins)
        if (!sp.consistent_after(sp.aindex.at(x), assign, cand)) return std::nullopt;
    std::vector<std::map<std::string, std::string>> out;
    Searcher s{sp, limits.max_nodes};
    s.sink = &out;
    if (!s.run(assign, cand)) return std::nullopt;
    return out.front();
}

} // namespace

std::optional<Homomorphism> find_homomorphism(const Structure& a, const Structure& b,
                                              const SearchLimits& limits) {
    return find_homomorphism_extending(a, b, {}, limits);
}

namespace {

// 0-ary facts do not enter the index machinery; check them separately.
bool nullary_facts_preserved(const Structure& a, const Structure& b) {
    for (const auto& [name, arity] : a.vocab().symbols)
        if (arity == 0 && !a.relation(name).empty() && b.relation(name).empty()) return false;
    return true;
}

} // namespace

std::optional<Homomorphism> find_homomorphism_extending(
    const Structure& a, const Structure& b, const std::map<std::string, std::string>& pins,
    const SearchLimits& limits) {
    if (!a.vocab().same_symbols(b.vocab()))
        throw InputError("find_homomorphism: structures use different vocabularies");
    if (!nullary_facts_preserved(a, b)) return std::nullopt;
    if (a.domain().empty()) return Homomorphism{a, b, {}};
    if (b.domain().empty()) return std::nullopt;
    auto m = search_one(a, b, pins, limits);
    if (!m) return std::nullopt;
    Homomorphism h{a, b, std::move(*m)};
    std::vector<std::string> diag;
    if (!verify_homomorphism(h, &diag))
        throw std::logic_error("internal: search returned a non-homomorphism");
    return h;
}

std::vector<std::map<std::string, std::string>> all_homomorphisms(const Structure& a,
                                                                  const Structure& b,
                                                                  const SearchLimits& limits) {
    if (!a.vocab().same_symbols(b.vocab()))
        throw InputError("all_homomorphisms: structures use different vocabularies");
    if (!nullary_facts_preserved(a, b)) return {};
    if (a.domain().empty()) return {std::map<std::string, std::string>{}};
    if (b.domain().empty()) return {};
    SearchSpace sp(a, b);
    std::vector<int> assign(sp.avars.size(), -1);
    auto cand = sp.unary_candidates();
    std::vector<std::map<std::string, std::string>> out;
    Searcher s{sp, limits.max_nodes};
    s.enumerate_all = true;
    s.sink = &out;
    s.run(assign, cand);
    return out;
}

bool homomorphic(const Structure& a, const Structure& b, const SearchLimits& limits) {
    return find_homomorphism(a, b, limits).has_value();
}

namespace {

// Degree profile of an element: per relation, per position, how many tuples
// hold it there. Isomorphisms must match profiles exactly.
std::map<std::string, std::vector<std::map<std::string, int>>> degree_profiles(const Structure& s) {
    std::map<std::string, std::vector<std::map<std::string, int>>> prof;
    for (const auto& e : s.domain()) prof[e] = {};
    for (const auto& [name, tuples] : s.relations()) {
        for (const auto& t : tuples) {
            for (std::size_t p = 0; p < t.size(); ++p) {
                auto& v = prof[t[p]];
                if (v.size() <= p) v.resize(p + 1);
                v[p][name] += 1;
            }
        }
    }
    return prof;
}

} // namespace

std::optional<std::map<std::string, std::string>> find_isomorphism(const Structure& a,
                                                                   const Structure& b,
                                                                   const SearchLimits& limits) {
    if (!a.vocab().same_symbols(b.vocab())) return std::nullopt;
    if (a.domain().size() != b.domain().size()) return std::nullopt;
    if (a.tuple_count() != b.tuple_count()) return std::nullopt;
    auto pa = degree_profiles(a);
    auto pb = degree_profiles(b);
    {
        // Multiset comparison of profiles.
        std::vector<std::string> fa, fb;
        for (const auto& [e, v] : pa) {
            std::string s;
            for (const auto& m : v)
                for (const auto& [n, c] : m) s += n + ":" + std::to_string(c) + ";";
            fa.push_back(s);
        }
        for (const auto& [e, v] : pb) {
            std::string s;
            for (const auto& m : v)
                for (const auto& [n, c] : m) s += n + ":" + std::to_string(c) + ";";
            fb.push_back(s);
        }
        std::sort(fa.begin(), fa.end());
        std::sort(fb.begin(), fb.end());
        if (fa != fb) return std::nullopt;
    }
    // Backtracking over bijections, forward-mapped tuples checked both ways.
    const auto& da = a.domain();
    const auto& db = b.domain();
    std::map<std::string, std::string> m;
    std::set<std::string> used;
    std::int64_t nodes = 0;

    std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
        if (++nodes > limits.max_nodes)
            throw ResourceError("isomorphism search exceeded node budget");
        if (i == da.size()) {
            if (!verify_homomorphism(a, b, m)) return false;
            std::map<std::string, std::string> inv;
            for (const auto& [x, y] : m) inv[y] = x;
            return verify_homomorphism(b, a, inv);
        }
        const auto& x = da[i];
        for (const auto& y : db) {
            if (used.count(y)) continue;
            if (pa.at(x) != pb.at(y)) continue;
            m[x] = y;
            used.insert(y);
            if (rec(i + 1)) return true;
            used.erase(y);
            m.erase(x);
        }
        return false;
    };
    if (!rec(0)) return std::nullopt;
    return m;
}

bool isomorphic(const Structure& a, const Structure& b, const SearchLimits& limits) {
    return find_isomorphism(a, b, limits).has_value();
}

namespace {

// Retraction onto the induced substructure with universe `target`, if any:
// a homomorphism pinned to the identity on `target`.
std::optional<std::map<std::string, std::string>> retraction_onto(
    const Structure& a, const std::set<std::string>& target, const SearchLimits& limits) {
    Structure sub = a.induced(target);
    // Search a -> sub with identity pins on target.
    std::map<std::string, std::string> pins;
    for (const auto& e : target) pins[e] = e;
    auto h = find_homomorphism_extending(a, sub, pins, limits);
    if (!h) return std::nullopt;
    return h->map;
}

} // namespace

CoreResult core_of(const Structure& a, const CoreLimits& limits) {
    if (static_cast<int>(a.domain().size()) > limits.max_domain)
        throw ResourceError("core_of: domain size " + std::to_string(a.domain().size()) +
                            " exceeds guard of " + std::to_string(limits.max_domain));

    // Phase 1: shrink to some core by repeatedly retracting away one element.
    std::set<std::string> universe(a.domain().begin(), a.domain().end());
    std::map<std::string, std::string> composed;
    for (const auto& e : a.domain()) composed[e] = e;

    bool shrank = true;
    Structure current = a;
    while (shrank) {
        shrank = false;
        for (const auto& drop : current.domain()) {
            std::set<std::string> smaller = universe;
            smaller.erase(drop);
            if (smaller.empty()) break;
            auto r = retraction_onto(current, smaller, limits.search);
            if (r) {
                for (auto& [x, y] : composed) y = r->at(y);
                universe = std::move(smaller);
                current = a.induced(universe);
                shrank = true;
                break;
            }
        }
    }
    const std::size_t core_size = universe.size();

    // Phase 2: all cores of `a` share this size; pick the lexicographically
    // least sub-universe of that size that carries a retraction.
    std::vector<std::string> dom = a.domain();
    std::vector<int> pick;
    std::set<std::string> best;
    std::map<std::string, std::string> best_map;
    std::function<bool(std::size_t, std::size_t)> choose = [&](std::size_t from,
                                                               std::size_t left) -> bool {
        if (left == 0) {
            std::set<std::string> cand;
            for (int i : pick) cand.insert(dom[i]);
            auto r = retraction_onto(a, cand, limits.search);
            if (r) {
                best = cand;
                best_map = *r;
                return true;
            }
            return false;
        }
        for (std::size_t i = from; i + left <= dom.size() + 0 && i < dom.size(); ++i) {
            pick.push_back(static_cast<int>(i));
            if (choose(i + 1, left - 1)) return true;
            pick.pop_back();
        }
        return false;
    };
    if (!choose(0, core_size))
        throw std::logic_error("internal: no retract of the established core size");

    Structure core = a.induced(best);
    Homomorphism retr{a, core, best_map};
    if (!verify_homomorphism(retr)) throw std::logic_error("internal: core retraction invalid");
    for (const auto& e : best)
        if (best_map.at(e) != e) throw std::logic_error("internal: retraction not identity on core");
    return CoreResult{std::move(core), std::move(retr)};
}

Operation::Operation(std::vector<std::string> domain, int arity, std::vector<int> table)
    : domain_(std::move(domain)), arity_(arity), table_(std::move(table)) {
    if (arity_ < 0) throw InputError("Operation: negative arity");
    std::size_t want = 1;
    for (int i = 0; i < arity_; ++i) want *= domain_.size();
    if (table_.size() != want)
        throw InputError("Operation: table size " + std::to_string(table_.size()) +
                         ", expected " + std::to_string(want));
    for (int v : table_)
        if (v < 0 || v >= static_cast<int>(domain_.size()))
            throw InputError("Operation: table entry out of range");
}

Operation Operation::from_function(std::vector<std::string> domain, int arity,
                                   const std::function<std::string(const Tuple&)>& f) {
    std::size_t n = domain.size();
    std::size_t total = 1;
    for (int i = 0; i < arity; ++i) total *= n;
    std::vector<int> table(total);
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < n; ++i) index[domain[i]] = static_cast<int>(i);
    for (std::size_t code = 0; code < total; ++code) {
        Tuple args(arity);
        std::size_t c = code;
        for (int p = arity - 1; p >= 0; --p) {
            args[p] = domain[c % n];
            c /= n;
        }
        auto it = index.find(f(args));
        if (it == index.end()) throw InputError("Operation: function value outside domain");
        table[code] = it->second;
    }
    return Operation(std::move(domain), arity, std::move(table));
}

int Operation::index_of(const std::string& e) const {
    for (std::size_t i = 0; i < domain_.size(); ++i)
        if (domain_[i] == e) return static_cast<int>(i);
    throw InputError("Operation: element '" + e + "' outside domain");
}

int Operation::apply_index(const std::vector<int>& args) const {
    if (static_cast<int>(args.size()) != arity_) throw InputError("Operation: arity mismatch");
    std::size_t code = 0;
    for (int v : args) {
        if (v < 0 || v >= static_cast<int>(domain_.size()))
            throw InputError("Operation: argument out of range");
        code = code * domain_.size() + static_cast<std::size_t>(v);
    }
    return table_[code];
}

const std::string& Operation::apply(const Tuple& args) const {
    std::vector<int> idx;
    idx.reserve(args.size());
    for (const auto& e : args) idx.push_back(index_of(e));
    return domain_[apply_index(idx)];
}

bool preserves_relation(const Operation& f, const Structure& b, const std::string& rel_name) {
    const auto& rel = b.relation(rel_name);
    const int m = f.arity();
    std::vector<const Tuple*> rows(m);
    std::vector<Tuple> tuples(rel.begin(), rel.end());
    if (tuples.empty()) return true;
    const std::size_t ar = tuples.front().size();
    std::function<bool(int)> rec = [&](int depth) -> bool {
        if (depth == m) {
            Tuple out(ar);
            for (std::size_t p = 0; p < ar; ++p) {
                Tuple args(m);
                for (int r = 0; r < m; ++r) args[r] = (*rows[r])[p];
                out[p] = f.apply(args);
            }
            return rel.count(out) > 0;
        }
        for (const auto& t : tuples) {
            rows[depth] = &t;
            if (!rec(depth + 1)) return false;
        }
        return true;
    };
    return rec(0);
}

bool is_polymorphism(const Operation& f, const Structure& b) {
    if (f.domain() != b.domain()) return false;
    for (const auto& [name, arity] : b.vocab().symbols)
        if (!preserves_relation(f, b, name)) return false;
    return true;
}

bool is_maltsev(const Operation& f) {
    if (f.arity() != 3) return false;
    const int n = static_cast<int>(f.domain().size());
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (f.apply_index({x, y, y}) != x) return false;
            if (f.apply_index({y, y, x}) != x) return false;
        }
    return true;
}

} // namespace cspb
