#include "cspb/canonical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "cspb/errors.hpp"

namespace cspb {

std::string to_string(CanonicalMode m) {
    return m == CanonicalMode::linear ? "linear" : "symmetric";
}

namespace {

std::string idb_name(int r, std::uint32_t mask) {
    return "I" + std::to_string(r) + "_" + std::to_string(mask);
}

// All index tuples of the given arity over {0..n-1}, lexicographic.
std::vector<std::vector<int>> index_tuples(int n, int arity) {
    std::vector<std::vector<int>> out;
    if (arity == 0) {
        out.push_back({});
        return out;
    }
    if (n == 0) return out;
    std::vector<int> cur(arity, 0);
    while (true) {
        out.push_back(cur);
        int p = arity - 1;
        while (p >= 0 && cur[p] == n - 1) {
            cur[p] = 0;
            --p;
        }
        if (p < 0) break;
        ++cur[p];
    }
    return out;
}

std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && r > (std::int64_t(1) << 61) / base) return std::int64_t(1) << 62;
        r *= base;
    }
    return r;
}

void check_params(int j, int k) {
    if (j < 0 || k < 1 || j > k)
        throw InputError("canonical: parameters must satisfy 0 <= j <= k and k >= 1");
}

// Serialization of a rule that is invariant under variable renaming:
// minimum over all permutations of the m variables.
std::string canonical_rule_form(int m, const DatalogAtom& head, const DatalogAtom* idb,
                                const std::vector<DatalogAtom>& edbs) {
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    auto var_index = [](const std::string& v) { return std::stoi(v.substr(1)); };
    std::string best;
    do {
        auto ser = [&](const DatalogAtom& at) {
            std::string s = at.pred + "(";
            for (const auto& v : at.vars) s += std::to_string(perm[var_index(v)]) + ",";
            return s + ")";
        };
        std::string cand = "H" + ser(head) + "|I" + (idb ? ser(*idb) : std::string("-"));
        std::vector<std::string> es;
        for (const auto& at : edbs) es.push_back(ser(at));
        std::sort(es.begin(), es.end());
        for (const auto& e : es) cand += "|" + e;
        if (best.empty() || cand < best) best = cand;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace

CanonicalProgram build_canonical(const Structure& b, int j, int k, CanonicalMode mode,
                                 const CanonicalLimits& limits) {
    check_params(j, k);
    const auto& bdom = b.domain();
    const int nb = static_cast<int>(bdom.size());

    // Subscript bit widths per arity.
    std::vector<int> w(j + 1);
    for (int r = 0; r <= j; ++r) {
        std::int64_t cnt = ipow(nb, r);
        if (cnt > limits.max_subscript_bits && r > 0)
            throw ResourceError("build_canonical: |B|^" + std::to_string(r) +
                                " exceeds the subscript width guard");
        w[r] = static_cast<int>(cnt);
    }

    // Up-front work estimate; the enumeration below touches
    // heads * (bodies+1) * 2^pool candidates per variable count.
    long double estimate = 0;
    for (int m = 0; m <= k; ++m) {
        long double heads = 0;
        for (int r = 0; r <= j; ++r)
            heads += std::pow(2.0L, w[r]) * static_cast<long double>(ipow(m, r));
        long double pool = 0;
        for (const auto& [sym, ar] : b.vocab().symbols) pool += ipow(m, ar);
        if (pool > 22)
            throw ResourceError("build_canonical: conjunction pool too large for the budget");
        estimate += heads * (heads + 1) * std::pow(2.0L, pool);
    }
    if (estimate > static_cast<long double>(limits.max_rule_candidates))
        throw ResourceError("build_canonical: candidate space exceeds the rule budget");

    CanonicalProgram cp;
    cp.j = j;
    cp.k = k;
    cp.mode = mode;
    cp.base.edb = b.vocab();
    cp.base.goal = idb_name(0, 0);

    // Declare one IDB per subset of B^r, r <= j; remember its tuple set.
    std::vector<std::vector<std::vector<int>>> btup(j + 1);
    for (int r = 0; r <= j; ++r) {
        btup[r] = index_tuples(nb, r);
        for (std::uint32_t mask = 0; mask < (1u << w[r]); ++mask) {
            std::string name = idb_name(r, mask);
            cp.base.idb.symbols.emplace_back(name, r);
            std::set<Tuple> q;
            for (int c = 0; c < w[r]; ++c) {
                if (!((mask >> c) & 1)) continue;
                Tuple t;
                for (int e : btup[r][c]) t.push_back(bdom[e]);
                q.insert(std::move(t));
            }
            cp.subscript_index[name] = std::move(q);
        }
    }

    // Relations of b over element indices, for fast membership.
    std::map<std::string, std::set<std::vector<int>>> brel;
    std::map<std::string, int> belem;
    for (int i = 0; i < nb; ++i) belem[bdom[i]] = i;
    for (const auto& [sym, tuples] : b.relations()) {
        auto& s = brel[sym];
        for (const auto& t : tuples) {
            std::vector<int> idx;
            for (const auto& e : t) idx.push_back(belem.at(e));
            s.insert(std::move(idx));
        }
    }

    std::set<std::string> seen_forms;
    std::int64_t candidates = 0;

    for (int m = 0; m <= k; ++m) {
        std::int64_t na = ipow(nb, m); // instantiations of the m variables
        if (na > 64)
            throw ResourceError("build_canonical: |B|^vars exceeds the bitmap width");
        const std::uint64_t all_alpha = (na >= 64) ? ~0ull : ((1ull << na) - 1);

        // alpha decoding: variable i of instantiation a.
        auto alpha_of = [&](std::int64_t a, int i) {
            for (int q = m - 1; q > i; --q) a /= nb;
            return static_cast<int>(a % nb);
        };

        // EDB atom pool over the m variables.
        struct PoolAtom {
            DatalogAtom atom;
            std::uint64_t truth = 0; // bit per instantiation
            std::uint32_t vars = 0;  // bitmask of used variables
        };
        std::vector<PoolAtom> pool;
        for (const auto& [sym, ar] : b.vocab().symbols) {
            for (const auto& vt : index_tuples(m, ar)) {
                PoolAtom pa;
                pa.atom.pred = sym;
                for (int v : vt) {
                    pa.atom.vars.push_back("x" + std::to_string(v));
                    pa.vars |= 1u << v;
                }
                for (std::int64_t a = 0; a < na; ++a) {
                    std::vector<int> t;
                    for (int v : vt) t.push_back(alpha_of(a, v));
                    auto it = brel.find(sym);
                    if (it != brel.end() && it->second.count(t)) pa.truth |= 1ull << a;
                }
                pool.push_back(std::move(pa));
            }
        }
        const int psz = static_cast<int>(pool.size());

        // Per subset of the pool: conjunction truth bitmap and used variables.
        std::vector<std::uint64_t> sub_truth(std::size_t(1) << psz);
        std::vector<std::uint32_t> sub_vars(std::size_t(1) << psz);
        sub_truth[0] = all_alpha;
        sub_vars[0] = 0;
        for (std::size_t s = 1; s < sub_truth.size(); ++s) {
            int low = std::countr_zero(s);
            sub_truth[s] = sub_truth[s & (s - 1)] & pool[low].truth;
            sub_vars[s] = sub_vars[s & (s - 1)] | pool[low].vars;
        }

        // Argument tuple projections: per (arity, arg tuple) the subscript
        // tuple code under each instantiation.
        std::vector<std::vector<std::vector<std::uint8_t>>> proj(j + 1);
        std::vector<std::vector<std::vector<int>>> argt(j + 1);
        for (int r = 0; r <= j; ++r) {
            argt[r] = index_tuples(m, r);
            proj[r].resize(argt[r].size());
            for (std::size_t ai = 0; ai < argt[r].size(); ++ai) {
                proj[r][ai].resize(na);
                for (std::int64_t a = 0; a < na; ++a) {
                    int code = 0;
                    for (int v : argt[r][ai]) code = code * nb + alpha_of(a, v);
                    proj[r][ai][a] = static_cast<std::uint8_t>(code);
                }
            }
        }

        struct IdbRef {
            int r;
            std::uint32_t mask;
            std::size_t argi;
            std::uint64_t in_bits; // instantiations whose projection lies in the subset
            std::uint32_t vars;
        };
        std::vector<IdbRef> refs;
        for (int r = 0; r <= j; ++r) {
            for (std::uint32_t mask = 0; mask < (1u << w[r]); ++mask) {
                for (std::size_t ai = 0; ai < argt[r].size(); ++ai) {
                    IdbRef ref{r, mask, ai, 0, 0};
                    for (std::int64_t a = 0; a < na; ++a)
                        if ((mask >> proj[r][ai][a]) & 1) ref.in_bits |= 1ull << a;
                    for (int v : argt[r][ai]) ref.vars |= 1u << v;
                    refs.push_back(ref);
                }
            }
        }

        const std::uint32_t all_vars = (m == 0) ? 0 : ((1u << m) - 1);
        auto make_atom = [&](const IdbRef& ref) {
            DatalogAtom at;
            at.pred = idb_name(ref.r, ref.mask);
            for (int v : argt[ref.r][ref.argi]) at.vars.push_back("x" + std::to_string(v));
            return at;
        };

        for (const auto& head : refs) {
            for (int bodyi = -1; bodyi < static_cast<int>(refs.size()); ++bodyi) {
                const IdbRef* body = bodyi < 0 ? nullptr : &refs[bodyi];
                if (body && body->r == 0 && body->mask == 0) continue; // goal never in bodies
                std::uint64_t body_bits = body ? body->in_bits : all_alpha;
                bool check_bwd = mode == CanonicalMode::symmetric && body &&
                                 !(head.r == 0 && head.mask == 0);
                for (std::size_t s = 0; s < sub_truth.size(); ++s) {
                    if (++candidates > limits.max_rule_candidates)
                        throw ResourceError("build_canonical: rule budget exceeded");
                    std::uint32_t used = head.vars | (body ? body->vars : 0) | sub_vars[s];
                    if (used != all_vars) continue;
                    std::uint64_t sat = sub_truth[s];
                    if ((sat & body_bits & ~head.in_bits) != 0) continue;
                    if (check_bwd && (sat & head.in_bits & ~body_bits) != 0) continue;

                    DatalogRule rule;
                    rule.head = make_atom(head);
                    rule.is_goal = (head.r == 0 && head.mask == 0);
                    std::vector<DatalogAtom> edbs;
                    for (int bit = 0; bit < psz; ++bit)
                        if ((s >> bit) & 1) edbs.push_back(pool[bit].atom);
                    const DatalogAtom idb_atom = body ? make_atom(*body) : DatalogAtom{};
                    std::string form =
                        canonical_rule_form(m, rule.head, body ? &idb_atom : nullptr, edbs);
                    if (!seen_forms.insert(std::move(form)).second) continue;
                    if (body) rule.body.push_back(idb_atom);
                    for (auto& at : edbs) rule.body.push_back(std::move(at));
                    cp.base.rules.push_back(std::move(rule));
                }
            }
        }
    }
    return cp;
}

// ---------------------------------------------------------------------------
// Lazy acceptance.

namespace {

struct LocalTuple {
    int r = 0;
    std::int64_t gid = 0;
    std::vector<int> pos;     // positions within the bag
    std::vector<int> img;     // per hom: subscript tuple code over B
};

struct Bag {
    std::vector<int> elems;   // sorted element indices of `a`
    std::vector<std::vector<int>> homs;
    std::vector<std::pair<std::string, std::vector<int>>> atoms; // diagram, local positions
    std::vector<LocalTuple> lts;
};

struct Parent {
    std::int64_t prev_key = -1;
    int bag = -1;
    int lt_src = -1;
    int lt_head = -1;
};

} // namespace

CanonicalAcceptance canonical_accept(const Structure& b, int j, int k, CanonicalMode mode,
                                     const Structure& a, const CanonicalLimits& limits) {
    check_params(j, k);
    if (!a.vocab().same_symbols(b.vocab()))
        throw InputError("canonical_accept: input and template vocabularies differ");

    const auto& adom = a.domain();
    const auto& bdom = b.domain();
    const int n = static_cast<int>(adom.size());
    const int nb = static_cast<int>(bdom.size());

    std::vector<int> w(j + 1);
    std::vector<std::vector<std::vector<int>>> btup(j + 1);
    for (int r = 0; r <= j; ++r) {
        std::int64_t cnt = ipow(nb, r);
        if (r > 0 && cnt > limits.max_subscript_bits)
            throw ResourceError("canonical_accept: |B|^" + std::to_string(r) +
                                " exceeds the subscript width guard");
        w[r] = static_cast<int>(cnt);
        btup[r] = index_tuples(nb, r);
    }

    // Tuple ids over `a`: offsets per arity, mixed-radix codes within.
    std::vector<std::int64_t> offset(j + 2, 0);
    long double state_bound = 0;
    for (int r = 0; r <= j; ++r) {
        std::int64_t cnt = ipow(n, r);
        offset[r + 1] = offset[r] + cnt;
        state_bound += static_cast<long double>(cnt) * std::pow(2.0L, w[r]);
    }
    if (state_bound > static_cast<long double>(limits.max_states))
        throw ResourceError("canonical_accept: state space exceeds the budget");
    const std::int64_t gid_count = offset[j + 1];
    const std::int64_t goal_gid = 0; // arity-0 empty tuple

    // Relations of b over indices.
    std::map<std::string, std::set<std::vector<int>>> brel;
    std::map<std::string, int> belem;
    for (int i = 0; i < nb; ++i) belem[bdom[i]] = i;
    for (const auto& [sym, tuples] : b.relations()) {
        auto& s = brel[sym];
        for (const auto& t : tuples) {
            std::vector<int> idx;
            for (const auto& e : t) idx.push_back(belem.at(e));
            s.insert(std::move(idx));
        }
    }
    std::map<std::string, int> aelem;
    for (int i = 0; i < n; ++i) aelem[adom[i]] = i;

    // Enumerate bags: subsets of the domain of size 0..k.
    std::vector<Bag> bags;
    {
        std::int64_t bag_count = 1;
        for (int sz = 1; sz <= std::min(k, n); ++sz) {
            std::int64_t c = 1;
            for (int i = 0; i < sz; ++i) c = c * (n - i) / (i + 1);
            bag_count += c;
        }
        if (bag_count > limits.max_bags)
            throw ResourceError("canonical_accept: bag count exceeds the budget");
    }
    {
        std::vector<int> pick;
        std::function<void(int)> gen = [&](int start) {
            bags.push_back(Bag{pick, {}, {}, {}});
            if (static_cast<int>(pick.size()) == std::min(k, n)) return;
            for (int e = start; e < n; ++e) {
                pick.push_back(e);
                gen(e + 1);
                pick.pop_back();
            }
        };
        gen(0);
        std::sort(bags.begin(), bags.end(), [](const Bag& x, const Bag& y) {
            return std::tie(x.elems) < std::tie(y.elems);
        });
    }

    for (auto& bag : bags) {
        const int sz = static_cast<int>(bag.elems.size());
        std::map<int, int> local;
        for (int i = 0; i < sz; ++i) local[bag.elems[i]] = i;
        // Diagram of the induced substructure, by vocabulary order.
        for (const auto& [sym, ar] : a.vocab().symbols) {
            for (const auto& t : a.relation(sym)) {
                std::vector<int> pos;
                bool inside = true;
                for (const auto& e : t) {
                    auto it = local.find(aelem.at(e));
                    if (it == local.end()) {
                        inside = false;
                        break;
                    }
                    pos.push_back(it->second);
                }
                if (inside) bag.atoms.emplace_back(sym, std::move(pos));
            }
        }
        // Homomorphisms of the diagram into b.
        std::int64_t hcount = ipow(nb, sz);
        if (hcount > 1'000'000)
            throw ResourceError("canonical_accept: per-bag homomorphism space too large");
        for (std::int64_t code = 0; code < hcount; ++code) {
            std::vector<int> h(sz);
            std::int64_t c = code;
            for (int i = sz - 1; i >= 0; --i) {
                h[i] = static_cast<int>(c % nb);
                c /= nb;
            }
            bool ok = true;
            for (const auto& [sym, pos] : bag.atoms) {
                std::vector<int> t;
                for (int p : pos) t.push_back(h[p]);
                auto it = brel.find(sym);
                if (it == brel.end() || !it->second.count(t)) {
                    ok = false;
                    break;
                }
            }
            if (ok) bag.homs.push_back(std::move(h));
        }
        // Local tuples of arity <= j with their images under each hom.
        for (int r = 0; r <= j; ++r) {
            for (const auto& pt : index_tuples(sz, r)) {
                LocalTuple lt;
                lt.r = r;
                lt.pos = pt;
                std::int64_t code = 0;
                for (int p : pt) code = code * n + bag.elems[p];
                lt.gid = offset[r] + code;
                for (const auto& h : bag.homs) {
                    int bc = 0;
                    for (int p : pt) bc = bc * nb + h[p];
                    lt.img.push_back(bc);
                }
                bag.lts.push_back(std::move(lt));
            }
        }
    }

    std::vector<std::vector<std::pair<int, int>>> occ(gid_count);
    for (std::size_t bi = 0; bi < bags.size(); ++bi)
        for (std::size_t li = 0; li < bags[bi].lts.size(); ++li)
            occ[bags[bi].lts[li].gid].emplace_back(static_cast<int>(bi), static_cast<int>(li));

    auto arity_of_gid = [&](std::int64_t gid) {
        int r = 0;
        while (gid >= offset[r + 1]) ++r;
        return r;
    };

    std::vector<std::vector<std::uint64_t>> reached(gid_count);
    auto bit_ref = [&](std::int64_t gid, std::uint32_t mask) -> std::pair<std::uint64_t&, std::uint64_t> {
        auto& v = reached[gid];
        if (v.empty()) {
            int r = arity_of_gid(gid);
            v.assign(((std::size_t(1) << w[r]) + 63) / 64, 0);
        }
        return {v[mask >> 6], std::uint64_t(1) << (mask & 63)};
    };

    CanonicalAcceptance result;
    std::unordered_map<std::int64_t, Parent> parent;
    std::deque<std::int64_t> queue;
    auto key_of = [](std::int64_t gid, std::uint32_t mask) {
        return (gid << 24) | static_cast<std::int64_t>(mask);
    };

    bool done = false;
    std::int64_t accept_key = -1;
    auto mark = [&](std::int64_t gid, std::uint32_t mask, const Parent& par) {
        if (done) return;
        auto [word, bit] = bit_ref(gid, mask);
        if (word & bit) return;
        word |= bit;
        if (++result.states_marked > limits.max_states)
            throw ResourceError("canonical_accept: state budget exceeded");
        std::int64_t key = key_of(gid, mask);
        parent.emplace(key, par);
        if (gid == goal_gid && mask == 0) {
            done = true;
            accept_key = key;
            return;
        }
        queue.push_back(key);
    };

    const bool symmetric = mode == CanonicalMode::symmetric;
    auto mark_interval = [&](std::int64_t gid, std::uint32_t lo, std::uint32_t hi,
                             const Parent& par) {
        std::uint32_t diff = hi & ~lo;
        std::uint32_t sub = diff;
        while (!done) {
            mark(gid, lo | sub, par);
            if (sub == 0) break;
            sub = (sub - 1) & diff;
        }
    };

    // Base facts: at every bag, every tuple gets the image of the full hom
    // set as its least subscript (all supersets in symmetric mode, which
    // lacks the weakening steps that make the least one sufficient).
    for (std::size_t bi = 0; bi < bags.size() && !done; ++bi) {
        const Bag& bag = bags[bi];
        for (std::size_t li = 0; li < bag.lts.size() && !done; ++li) {
            const LocalTuple& lt = bag.lts[li];
            std::uint32_t q0 = 0;
            for (int c : lt.img) q0 |= 1u << c;
            Parent par{-1, static_cast<int>(bi), -1, static_cast<int>(li)};
            if (symmetric) {
                std::uint32_t full = (w[lt.r] >= 32) ? ~0u : ((1u << w[lt.r]) - 1);
                mark_interval(lt.gid, q0, full, par);
            } else {
                mark(lt.gid, q0, par);
            }
        }
    }

    while (!queue.empty() && !done) {
        std::int64_t key = queue.front();
        queue.pop_front();
        std::int64_t gid = key >> 24;
        std::uint32_t mask = static_cast<std::uint32_t>(key & 0xffffff);
        for (const auto& [bi, li] : occ[gid]) {
            const Bag& bag = bags[bi];
            const LocalTuple& src = bag.lts[li];
            for (std::size_t ti = 0; ti < bag.lts.size(); ++ti) {
                const LocalTuple& dst = bag.lts[ti];
                std::uint32_t lo = 0, bad = 0;
                for (std::size_t h = 0; h < bag.homs.size(); ++h) {
                    if ((mask >> src.img[h]) & 1)
                        lo |= 1u << dst.img[h];
                    else
                        bad |= 1u << dst.img[h];
                }
                Parent par{key, bi, li, static_cast<int>(ti)};
                if (symmetric) {
                    if (lo & bad) continue;
                    std::uint32_t full = (w[dst.r] >= 32) ? ~0u : ((1u << w[dst.r]) - 1);
                    mark_interval(dst.gid, lo, full & ~bad, par);
                } else {
                    mark(dst.gid, lo, par);
                }
                if (done) break;
            }
            if (done) break;
        }
    }

    result.accepted = done;
    if (!done) return result;

    // Reconstruct the accepting derivation as explicit rules over the bags.
    std::vector<std::int64_t> chain;
    for (std::int64_t key = accept_key; key != -1; key = parent.at(key).prev_key)
        chain.push_back(key);
    std::reverse(chain.begin(), chain.end());

    CanonicalProgram& wp = result.witness_program;
    wp.j = j;
    wp.k = k;
    wp.mode = mode;
    wp.base.edb = b.vocab();
    wp.base.goal = idb_name(0, 0);

    std::set<std::pair<int, std::uint32_t>> used_idbs;
    auto decode = [&](std::int64_t key) {
        std::int64_t gid = key >> 24;
        std::uint32_t mask = static_cast<std::uint32_t>(key & 0xffffff);
        return std::make_pair(arity_of_gid(gid), mask);
    };

    struct PendingStep {
        DatalogRule rule;
        std::map<std::string, std::string> assignment;
    };
    std::vector<PendingStep> steps;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const Parent& par = parent.at(chain[i]);
        const Bag& bag = bags[par.bag];
        auto var = [&](int p) { return "x" + std::to_string(p); };
        PendingStep st;
        auto [hr, hmask] = decode(chain[i]);
        used_idbs.insert({hr, hmask});
        st.rule.head.pred = idb_name(hr, hmask);
        for (int p : bag.lts[par.lt_head].pos) st.rule.head.vars.push_back(var(p));
        st.rule.is_goal = (hr == 0 && hmask == 0);
        if (par.prev_key != -1) {
            auto [sr, smask] = decode(par.prev_key);
            used_idbs.insert({sr, smask});
            DatalogAtom at;
            at.pred = idb_name(sr, smask);
            for (int p : bags[par.bag].lts[par.lt_src].pos) at.vars.push_back(var(p));
            st.rule.body.push_back(std::move(at));
        }
        for (const auto& [sym, pos] : bag.atoms) {
            DatalogAtom at;
            at.pred = sym;
            for (int p : pos) at.vars.push_back(var(p));
            st.rule.body.push_back(std::move(at));
        }
        for (const auto& v : st.rule.variables()) {
            int p = std::stoi(v.substr(1));
            st.assignment[v] = adom[bag.elems[p]];
        }
        steps.push_back(std::move(st));
    }

    for (const auto& [r, mask] : used_idbs) {
        wp.base.idb.symbols.emplace_back(idb_name(r, mask), r);
        std::set<Tuple> q;
        for (int c = 0; c < w[r]; ++c) {
            if (!((mask >> c) & 1)) continue;
            Tuple t;
            for (int e : btup[r][c]) t.push_back(bdom[e]);
            q.insert(std::move(t));
        }
        wp.subscript_index[idb_name(r, mask)] = std::move(q);
    }

    // Dedup rules by printed form; remember each step's index.
    std::map<std::string, int> rule_index;
    Derivation witness;
    auto rule_text = [&](const DatalogRule& r) {
        std::ostringstream os;
        os << r.head.pred << '(';
        for (const auto& v : r.head.vars) os << v << ',';
        os << ")<-";
        for (const auto& at : r.body) {
            os << at.pred << '(';
            for (const auto& v : at.vars) os << v << ',';
            os << ')';
        }
        return os.str();
    };
    for (auto& st : steps) {
        std::string text = rule_text(st.rule);
        auto it = rule_index.find(text);
        int idx;
        if (it == rule_index.end()) {
            idx = static_cast<int>(wp.base.rules.size());
            rule_index.emplace(std::move(text), idx);
            wp.base.rules.push_back(st.rule);
        } else {
            idx = it->second;
        }
        witness.steps.push_back(DerivationStep{idx, st.assignment});
    }

    // In symmetric mode ship the reversed mates too, so the emitted program
    // itself classifies as symmetric.
    if (symmetric) {
        std::size_t fixed = wp.base.rules.size();
        for (std::size_t i = 0; i < fixed; ++i) {
            const DatalogRule& r = wp.base.rules[i];
            if (r.is_goal || r.body.empty()) continue;
            const DatalogAtom& first = r.body.front();
            if (first.pred.empty() || first.pred[0] != 'I') continue;
            DatalogRule mate;
            mate.head = first;
            mate.body.push_back(r.head);
            for (std::size_t q = 1; q < r.body.size(); ++q) mate.body.push_back(r.body[q]);
            std::string text = rule_text(mate);
            if (!rule_index.count(text)) {
                rule_index.emplace(std::move(text), static_cast<int>(wp.base.rules.size()));
                wp.base.rules.push_back(std::move(mate));
            }
        }
    }

    auto check = validate_derivation(wp.base, witness, &a);
    if (!check.ok)
        throw std::logic_error("internal: canonical witness failed validation: " +
                               check.diagnostics.front());
    result.witness = std::move(witness);
    return result;
}

} // namespace cspb
