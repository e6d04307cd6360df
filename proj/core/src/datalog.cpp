#include "cspb/datalog.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace cspb {

bool is_builtin_predicate(std::string_view name) {
    return name == "suc" || name == "first" || name == "last";
}

int builtin_arity(std::string_view name) {
    if (name == "suc") return 2;
    if (name == "first" || name == "last") return 1;
    throw InputError("not a built-in predicate: '" + std::string(name) + "'");
}

std::vector<std::string> DatalogRule::variables() const {
    std::vector<std::string> out;
    auto add = [&](const DatalogAtom& at) {
        for (const auto& v : at.vars)
            if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    };
    add(head);
    for (const auto& at : body) add(at);
    return out;
}

std::vector<const DatalogAtom*> DatalogRule::body_idb(const DatalogProgram& p) const {
    std::vector<const DatalogAtom*> out;
    for (const auto& at : body)
        if (p.is_idb(at.pred)) out.push_back(&at);
    return out;
}

bool DatalogRule::recursive(const DatalogProgram& p) const { return !body_idb(p).empty(); }

bool DatalogProgram::uses_builtins() const {
    for (const auto& r : rules)
        for (const auto& at : r.body)
            if (is_builtin_predicate(at.pred)) return true;
    return false;
}

namespace {

struct ProgCursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1, col = 1;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    void advance() {
        if (text[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }
    void skip() {
        while (!done()) {
            if (peek() == '#') {
                while (!done() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(peek()))) {
                advance();
            } else {
                return;
            }
        }
    }
    bool name_char(char c) const {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    }
    std::string ident() {
        skip();
        std::size_t start = pos;
        while (!done() && name_char(peek())) advance();
        return text.substr(start, pos - start);
    }
    void expect(char c, const std::string& what) {
        skip();
        if (done() || peek() != c) throw ParseError("expected " + what, line, col);
        advance();
    }
    bool try_consume(char c) {
        skip();
        if (!done() && peek() == c) {
            advance();
            return true;
        }
        return false;
    }
    bool try_consume_str(const std::string& s) {
        skip();
        if (text.compare(pos, s.size(), s) == 0) {
            for (std::size_t i = 0; i < s.size(); ++i) advance();
            return true;
        }
        return false;
    }
};

DatalogAtom parse_atom(ProgCursor& cur) {
    std::string pred = cur.ident();
    if (pred.empty()) throw ParseError("expected predicate name", cur.line, cur.col);
    DatalogAtom at{pred, {}};
    if (cur.try_consume('(')) {
        if (!cur.try_consume(')')) {
            while (true) {
                std::string v = cur.ident();
                if (v.empty()) throw ParseError("expected variable name", cur.line, cur.col);
                at.vars.push_back(v);
                if (cur.try_consume(')')) break;
                cur.expect(',', "',' or ')' in atom");
            }
        }
    }
    return at;
}

} // namespace

DatalogProgram parse_program(const std::string& text) {
    ProgCursor cur{text};
    DatalogProgram p;
    bool saw_goal = false;

    auto parse_decl_list = [&](Vocabulary& into) {
        while (true) {
            std::string name = cur.ident();
            if (name.empty()) throw ParseError("expected symbol name", cur.line, cur.col);
            cur.expect('/', "'/' after symbol name");
            std::string ar = cur.ident();
            if (ar.empty() || !std::all_of(ar.begin(), ar.end(), [](char c) {
                    return std::isdigit(static_cast<unsigned char>(c));
                }))
                throw ParseError("expected arity", cur.line, cur.col);
            if (is_builtin_predicate(name))
                throw ParseError("'" + name + "' is a reserved built-in", cur.line, cur.col);
            for (const auto& [n, _] : into.symbols)
                if (n == name) throw ParseError("duplicate declaration of '" + name + "'", cur.line, cur.col);
            into.symbols.emplace_back(name, std::stoi(ar));
            if (cur.try_consume('.')) break;
            cur.expect(',', "',' or '.' in declaration");
        }
    };

    cur.skip();
    while (!cur.done()) {
        int at_line = cur.line, at_col = cur.col;
        if (cur.try_consume_str("edb ") || cur.try_consume_str("edb\t")) {
            parse_decl_list(p.edb);
        } else if (cur.try_consume_str("idb ") || cur.try_consume_str("idb\t")) {
            parse_decl_list(p.idb);
        } else if (cur.try_consume_str("goal ") || cur.try_consume_str("goal\t")) {
            std::string g = cur.ident();
            if (g.empty()) throw ParseError("expected goal symbol", cur.line, cur.col);
            if (saw_goal) throw ParseError("duplicate goal declaration", at_line, at_col);
            saw_goal = true;
            p.goal = g;
            cur.expect('.', "'.' after goal declaration");
        } else {
            DatalogAtom head = parse_atom(cur);
            DatalogRule rule;
            rule.head = std::move(head);
            if (!cur.try_consume('.')) {
                cur.skip();
                if (!cur.try_consume_str(":-"))
                    throw ParseError("expected ':-' or '.' after rule head", cur.line, cur.col);
                while (true) {
                    rule.body.push_back(parse_atom(cur));
                    if (cur.try_consume('.')) break;
                    cur.expect(',', "',' or '.' in rule body");
                }
            }
            p.rules.push_back(std::move(rule));
        }
        cur.skip();
    }

    // Cross checks.
    if (!saw_goal) throw ParseError("missing goal declaration", cur.line, cur.col);
    if (!p.idb.has(p.goal)) throw ParseError("goal symbol '" + p.goal + "' not declared as idb", 1, 1);
    if (p.idb.arity(p.goal) != 0) throw ParseError("goal symbol must have arity 0", 1, 1);
    for (const auto& [n, a] : p.idb.symbols)
        if (p.edb.has(n)) throw ParseError("symbol '" + n + "' declared both edb and idb", 1, 1);

    auto check_arity = [&](const DatalogAtom& at, bool head_position) {
        int want;
        if (p.idb.has(at.pred)) {
            want = p.idb.arity(at.pred);
        } else if (p.edb.has(at.pred)) {
            if (head_position) throw ParseError("edb symbol '" + at.pred + "' used as rule head", 1, 1);
            want = p.edb.arity(at.pred);
        } else if (is_builtin_predicate(at.pred)) {
            if (head_position)
                throw ParseError("built-in '" + at.pred + "' used as rule head", 1, 1);
            want = builtin_arity(at.pred);
        } else {
            throw ParseError("undeclared predicate '" + at.pred + "'", 1, 1);
        }
        if (static_cast<int>(at.vars.size()) != want)
            throw ParseError("atom '" + at.pred + "' has arity " + std::to_string(at.vars.size()) +
                                 ", declared " + std::to_string(want),
                             1, 1);
    };
    bool has_nonrecursive = false;
    for (auto& r : p.rules) {
        check_arity(r.head, true);
        r.is_goal = (r.head.pred == p.goal);
        for (const auto& at : r.body) {
            check_arity(at, false);
            if (at.pred == p.goal)
                throw ParseError("goal symbol '" + p.goal + "' may not occur in a rule body", 1, 1);
        }
        if (!r.recursive(p)) has_nonrecursive = true;
    }
    if (!has_nonrecursive)
        p.warnings.push_back("no nonrecursive rule: no derivation can start, program accepts nothing");

    return p;
}

std::string print_program(const DatalogProgram& p) {
    std::ostringstream out;
    auto decl = [&](const char* kw, const Vocabulary& v) {
        if (v.symbols.empty()) return;
        out << kw << ' ';
        for (std::size_t i = 0; i < v.symbols.size(); ++i) {
            if (i) out << ", ";
            out << v.symbols[i].first << '/' << v.symbols[i].second;
        }
        out << ".\n";
    };
    decl("edb", p.edb);
    decl("idb", p.idb);
    out << "goal " << p.goal << ".\n";
    auto atom = [&](const DatalogAtom& at) {
        out << at.pred;
        if (!at.vars.empty()) {
            out << '(';
            for (std::size_t i = 0; i < at.vars.size(); ++i) out << (i ? "," : "") << at.vars[i];
            out << ')';
        }
    };
    for (const auto& r : p.rules) {
        atom(r.head);
        if (!r.body.empty()) {
            out << " :- ";
            for (std::size_t i = 0; i < r.body.size(); ++i) {
                if (i) out << ", ";
                atom(r.body[i]);
            }
        }
        out << ".\n";
    }
    return out.str();
}

std::string to_string(Fragment f) {
    switch (f) {
        case Fragment::general: return "general";
        case Fragment::linear: return "linear";
        case Fragment::symmetric: return "symmetric";
    }
    return "general";
}

namespace {

// Canonical serialization of a rule modulo variable renaming: minimum over
// all variable permutations of (head, body-IDB atom, sorted EDB multiset).
std::string rule_canonical_form(const DatalogProgram& p, const DatalogAtom& head,
                                const DatalogAtom* body_idb_atom,
                                std::vector<DatalogAtom> edb_atoms) {
    std::vector<std::string> vars;
    auto collect = [&](const DatalogAtom& at) {
        for (const auto& v : at.vars)
            if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    };
    collect(head);
    if (body_idb_atom) collect(*body_idb_atom);
    for (const auto& at : edb_atoms) collect(at);

    std::vector<int> perm(vars.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::string best;
    do {
        std::map<std::string, std::string> ren;
        for (std::size_t i = 0; i < vars.size(); ++i)
            ren[vars[perm[i]]] = "v" + std::to_string(i);
        auto serialize = [&](const DatalogAtom& at) {
            std::string s = at.pred + "(";
            for (const auto& v : at.vars) s += ren.at(v) + ",";
            s += ")";
            return s;
        };
        std::string cand = "H:" + serialize(head);
        cand += "|I:" + (body_idb_atom ? serialize(*body_idb_atom) : std::string("-"));
        std::vector<std::string> es;
        for (const auto& at : edb_atoms) es.push_back(serialize(at));
        std::sort(es.begin(), es.end());
        for (const auto& e : es) cand += "|E:" + e;
        if (best.empty() || cand < best) best = cand;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace

FragmentReport classify_fragment(const DatalogProgram& p) {
    FragmentReport rep;
    rep.j = 0;
    rep.k = 0;
    bool linear = true;
    for (const auto& r : p.rules) {
        rep.k = std::max(rep.k, static_cast<int>(r.variables().size()));
        auto idbs = r.body_idb(p);
        if (idbs.size() > 1) linear = false;
        if (p.is_idb(r.head.pred)) rep.j = std::max(rep.j, static_cast<int>(r.head.vars.size()));
        for (const auto* at : idbs) rep.j = std::max(rep.j, static_cast<int>(at->vars.size()));
    }
    if (!linear) {
        rep.fragment = Fragment::general;
        return rep;
    }
    // Symmetric: every recursive non-goal rule has its reversed mate.
    std::set<std::string> forms;
    for (const auto& r : p.rules) {
        auto idbs = r.body_idb(p);
        if (idbs.empty()) continue;
        std::vector<DatalogAtom> edbs;
        for (const auto& at : r.body)
            if (!p.is_idb(at.pred)) edbs.push_back(at);
        forms.insert(rule_canonical_form(p, r.head, idbs[0], edbs));
    }
    for (std::size_t i = 0; i < p.rules.size(); ++i) {
        const auto& r = p.rules[i];
        if (r.is_goal) continue;
        auto idbs = r.body_idb(p);
        if (idbs.empty()) continue;
        std::vector<DatalogAtom> edbs;
        for (const auto& at : r.body)
            if (!p.is_idb(at.pred)) edbs.push_back(at);
        // The symmetric mate: head and body IDB exchanged.
        std::string want = rule_canonical_form(p, *idbs[0], &r.head, edbs);
        if (!forms.count(want)) rep.missing_symmetric_pairs.push_back(static_cast<int>(i));
    }
    rep.fragment = rep.missing_symmetric_pairs.empty() ? Fragment::symmetric : Fragment::linear;
    return rep;
}

std::vector<std::string> Derivation::codomain() const {
    std::set<std::string> vals;
    for (const auto& st : steps)
        for (const auto& [v, e] : st.assignment) vals.insert(e);
    return {vals.begin(), vals.end()};
}

ValidationResult validate_derivation(const DatalogProgram& p, const Derivation& d,
                                     const Structure* a) {
    ValidationResult res;
    auto fail = [&](const std::string& msg) {
        res.ok = false;
        res.diagnostics.push_back(msg);
    };
    if (d.steps.empty()) {
        fail("derivation has no steps");
        return res;
    }
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
        const auto& st = d.steps[i];
        if (st.rule < 0 || st.rule >= static_cast<int>(p.rules.size())) {
            fail("step " + std::to_string(i) + ": rule index " + std::to_string(st.rule) +
                 " out of range");
            return res;
        }
        const auto& rule = p.rules[st.rule];
        auto vars = rule.variables();
        for (const auto& v : vars)
            if (!st.assignment.count(v))
                fail("step " + std::to_string(i) + ": variable '" + v + "' unassigned");
        for (const auto& [v, e] : st.assignment) {
            if (std::find(vars.begin(), vars.end(), v) == vars.end())
                fail("step " + std::to_string(i) + ": assignment binds foreign variable '" + v + "'");
            if (a && !a->has_element(e))
                fail("step " + std::to_string(i) + ": value '" + e + "' outside input domain");
        }
        auto idbs = rule.body_idb(p);
        if (i == 0 && !idbs.empty())
            fail("step 0: first rule must be nonrecursive");
        if (i > 0 && idbs.size() != 1)
            fail("step " + std::to_string(i) + ": rule must have exactly one body IDB atom");
        if (i + 1 == d.steps.size() && !rule.is_goal)
            fail("last step: rule is not a goal rule");
        if (i + 1 < d.steps.size() && rule.is_goal)
            fail("step " + std::to_string(i) + ": goal rule before the end");
    }
    if (!res.ok) return res;

    // Positional chaining between consecutive steps.
    for (std::size_t i = 0; i + 1 < d.steps.size(); ++i) {
        const auto& cur = p.rules[d.steps[i].rule];
        const auto& nxt = p.rules[d.steps[i + 1].rule];
        auto idbs = nxt.body_idb(p);
        const DatalogAtom& link = *idbs[0];
        if (link.pred != cur.head.pred) {
            fail("step " + std::to_string(i + 1) + ": body IDB '" + link.pred +
                 "' does not match preceding head '" + cur.head.pred + "'");
            continue;
        }
        for (std::size_t pos = 0; pos < link.vars.size(); ++pos) {
            const auto& lhs = d.steps[i].assignment.at(cur.head.vars[pos]);
            const auto& rhs = d.steps[i + 1].assignment.at(link.vars[pos]);
            if (lhs != rhs)
                fail("step " + std::to_string(i + 1) + ": chaining mismatch at position " +
                     std::to_string(pos) + " ('" + lhs + "' vs '" + rhs + "')");
        }
    }

    // EDB atoms must hold in the input when one is supplied.
    if (a) {
        for (std::size_t i = 0; i < d.steps.size(); ++i) {
            const auto& rule = p.rules[d.steps[i].rule];
            for (const auto& at : rule.body) {
                if (p.is_idb(at.pred)) continue;
                if (!a->vocab().has(at.pred)) {
                    fail("input lacks relation '" + at.pred + "'");
                    continue;
                }
                Tuple t;
                t.reserve(at.vars.size());
                for (const auto& v : at.vars) t.push_back(d.steps[i].assignment.at(v));
                if (!a->relation(at.pred).count(t)) {
                    std::string s = at.pred + "(";
                    for (std::size_t q = 0; q < t.size(); ++q) s += (q ? "," : "") + t[q];
                    fail("step " + std::to_string(i) + ": atom " + s + ") not in input");
                }
            }
        }
    }
    return res;
}

Structure extract_structure(const DatalogProgram& p, const Derivation& d) {
    std::map<std::string, std::set<Tuple>> rels;
    std::set<std::string> elems;
    for (const auto& st : d.steps) {
        if (st.rule < 0 || st.rule >= static_cast<int>(p.rules.size()))
            throw InputError("extract_structure: rule index out of range");
        const auto& rule = p.rules[st.rule];
        for (const auto& at : rule.body) {
            if (p.is_idb(at.pred) || is_builtin_predicate(at.pred)) continue;
            Tuple t;
            t.reserve(at.vars.size());
            for (const auto& v : at.vars) {
                auto it = st.assignment.find(v);
                if (it == st.assignment.end())
                    throw InputError("extract_structure: unassigned variable '" + v + "'");
                t.push_back(it->second);
                elems.insert(it->second);
            }
            rels[at.pred].insert(std::move(t));
        }
    }
    return Structure(p.edb, std::vector<std::string>(elems.begin(), elems.end()), std::move(rels));
}

DerivationProperties derivation_properties(const DatalogProgram& p, const Derivation& d) {
    DerivationProperties out;

    // Node per (step, variable); union by chaining positions.
    std::vector<std::pair<int, std::string>> nodes;
    std::map<std::pair<int, std::string>, int> index;
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
        for (const auto& v : p.rules[d.steps[i].rule].variables()) {
            index[{static_cast<int>(i), v}] = static_cast<int>(nodes.size());
            nodes.emplace_back(static_cast<int>(i), v);
        }
    }
    std::vector<int> parent(nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](int x, int y) { parent[find(x)] = find(y); };

    for (std::size_t i = 0; i + 1 < d.steps.size(); ++i) {
        const auto& cur = p.rules[d.steps[i].rule];
        const auto& nxt = p.rules[d.steps[i + 1].rule];
        auto idbs = nxt.body_idb(p);
        if (idbs.size() != 1) continue;
        const DatalogAtom& link = *idbs[0];
        if (link.pred != cur.head.pred || link.vars.size() != cur.head.vars.size()) continue;
        for (std::size_t pos = 0; pos < link.vars.size(); ++pos)
            unite(index.at({static_cast<int>(i), cur.head.vars[pos]}),
                  index.at({static_cast<int>(i + 1), link.vars[pos]}));
    }

    std::map<int, std::vector<int>> classes;
    for (std::size_t n = 0; n < nodes.size(); ++n) classes[find(static_cast<int>(n))].push_back(static_cast<int>(n));

    out.free = true;
    std::set<std::string> seen_values;
    for (const auto& [root, members] : classes) {
        std::vector<std::pair<int, std::string>> cls;
        std::set<std::string> vals;
        for (int n : members) {
            cls.push_back(nodes[n]);
            vals.insert(d.steps[nodes[n].first].assignment.at(nodes[n].second));
        }
        // A chained class carries one value on a valid derivation; when it
        // does not, the derivation is not free either.
        if (vals.size() != 1) out.free = false;
        for (const auto& v : vals) {
            if (seen_values.count(v)) out.free = false;
            seen_values.insert(v);
        }
        out.eq_classes.push_back(std::move(cls));
    }

    // Read-once: instantiated non-built-in EDB atoms pairwise distinct.
    out.read_once = true;
    std::set<std::pair<std::string, Tuple>> used;
    for (const auto& st : d.steps) {
        const auto& rule = p.rules[st.rule];
        for (const auto& at : rule.body) {
            if (p.is_idb(at.pred) || is_builtin_predicate(at.pred)) continue;
            Tuple t;
            for (const auto& v : at.vars) t.push_back(st.assignment.at(v));
            if (!used.emplace(at.pred, std::move(t)).second) out.read_once = false;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

using Packed = std::uint64_t;

struct Interned {
    std::vector<std::string> elems; // domain order
    std::map<std::string, int> index;
    // EDB relations as packed tuple sets, by predicate name.
    std::map<std::string, std::set<Packed>, std::less<>> edb;
    std::map<std::string, std::vector<Packed>, std::less<>> edb_list;

    static Packed pack(const std::vector<int>& t) {
        Packed out = 0;
        for (int v : t) out = (out << 8) | static_cast<Packed>(v + 1);
        return out;
    }
};

struct FactKey {
    int pred;
    Packed tuple;
    bool operator<(const FactKey& o) const {
        return std::tie(pred, tuple) < std::tie(o.pred, o.tuple);
    }
    bool operator==(const FactKey&) const = default;
};

struct Provenance {
    int rule;
    std::vector<int> assignment; // values per rule.variables() slot
    std::optional<FactKey> prev;
};

} // namespace

EvalResult evaluate(const DatalogProgram& p, const Structure& a, const EvalLimits& limits) {
    // Vocabulary checks.
    for (const auto& [name, arity] : p.edb.symbols) {
        if (!a.vocab().has(name) || a.vocab().arity(name) != arity)
            throw InputError("evaluate: input lacks edb relation '" + name + "/" +
                             std::to_string(arity) + "'");
        if (p.idb.has(name)) throw InputError("evaluate: symbol '" + name + "' is idb and edb");
    }
    for (const auto& r : p.rules)
        for (const auto& at : r.body)
            if (is_builtin_predicate(at.pred) &&
                (!a.vocab().has(at.pred) || a.vocab().arity(at.pred) != builtin_arity(at.pred)))
                throw InputError("evaluate: program uses built-in '" + at.pred +
                                 "' but the input provides no such relation");
    for (const auto& [name, arity] : p.idb.symbols)
        if (a.vocab().has(name))
            throw InputError("evaluate: input provides relation '" + name +
                             "' which is an idb symbol of the program");

    if (static_cast<int>(a.domain().size()) > limits.max_domain)
        throw ResourceError("evaluate: domain exceeds packing guard of " +
                            std::to_string(limits.max_domain));
    for (const auto& [name, arity] : p.edb.symbols)
        if (arity > 8) throw ResourceError("evaluate: relation arity exceeds packing guard of 8");
    for (const auto& [name, arity] : p.idb.symbols)
        if (arity > 8) throw ResourceError("evaluate: relation arity exceeds packing guard of 8");

    Interned in;
    in.elems = a.domain();
    for (std::size_t i = 0; i < in.elems.size(); ++i) in.index[in.elems[i]] = static_cast<int>(i);
    for (const auto& [name, tuples] : a.relations()) {
        auto& s = in.edb[name];
        auto& l = in.edb_list[name];
        for (const auto& t : tuples) {
            std::vector<int> idx;
            idx.reserve(t.size());
            for (const auto& e : t) idx.push_back(in.index.at(e));
            Packed pk = Interned::pack(idx);
            s.insert(pk);
            l.push_back(pk);
        }
        std::sort(l.begin(), l.end());
    }

    std::map<std::string, int> idb_id;
    std::vector<std::string> idb_names;
    for (const auto& [name, arity] : p.idb.symbols) {
        idb_id[name] = static_cast<int>(idb_names.size());
        idb_names.push_back(name);
    }
    const int goal_id = idb_id.at(p.goal);

    // Per-rule precomputation: variable slots and atom descriptors.
    struct AtomDesc {
        bool idb;
        int pred_id;            // idb id or -1
        std::string edb_name;   // for edb atoms
        int arity;
        std::vector<int> slots; // variable slot per position
    };
    struct RuleDesc {
        std::vector<std::string> vars;
        AtomDesc head;
        std::vector<AtomDesc> body; // idb atoms first would break lex order; keep written order
        int n_idb = 0;
    };
    std::vector<RuleDesc> rds(p.rules.size());
    for (std::size_t ri = 0; ri < p.rules.size(); ++ri) {
        const auto& r = p.rules[ri];
        auto& rd = rds[ri];
        rd.vars = r.variables();
        if (static_cast<int>(rd.vars.size()) > limits.max_rule_vars)
            throw ResourceError("evaluate: rule has too many variables for the packing guard");
        auto slot = [&](const std::string& v) {
            return static_cast<int>(std::find(rd.vars.begin(), rd.vars.end(), v) - rd.vars.begin());
        };
        auto desc = [&](const DatalogAtom& at) {
            AtomDesc d;
            d.idb = p.is_idb(at.pred);
            d.pred_id = d.idb ? idb_id.at(at.pred) : -1;
            d.edb_name = d.idb ? "" : at.pred;
            d.arity = static_cast<int>(at.vars.size());
            for (const auto& v : at.vars) d.slots.push_back(slot(v));
            return d;
        };
        rd.head = desc(r.head);
        for (const auto& at : r.body) {
            rd.body.push_back(desc(at));
            if (rd.body.back().idb) ++rd.n_idb;
        }
    }

    auto fragment = classify_fragment(p).fragment;
    const bool want_witness = fragment != Fragment::general;

    std::set<FactKey> known;
    std::map<FactKey, Provenance> prov;
    std::vector<FactKey> delta, next_delta;
    EvalResult res;

    const int nelems = static_cast<int>(in.elems.size());

    // Enumerate satisfying assignments of `rule`, calling sink(assign) in
    // lexicographic order; body atoms are matched in written order. For
    // rounds > 0 at least one body IDB fact must come from `delta_set`.
    auto run_rule = [&](std::size_t ri, const std::set<FactKey>& full,
                        const std::set<FactKey>* delta_set,
                        const std::function<void(const std::vector<int>&)>& sink) {
        const auto& rd = rds[ri];
        std::vector<int> assign(rd.vars.size(), -1);
        std::function<void(std::size_t, bool)> rec = [&](std::size_t ai, bool used_delta) {
            if (ai == rd.body.size()) {
                if (delta_set && !used_delta) return;
                // Unconstrained variables (head-only) range over the domain.
                std::function<void(std::size_t)> fill = [&](std::size_t vi) {
                    if (vi == assign.size()) {
                        sink(assign);
                        return;
                    }
                    if (assign[vi] >= 0) {
                        fill(vi + 1);
                        return;
                    }
                    for (int v = 0; v < nelems; ++v) {
                        assign[vi] = v;
                        fill(vi + 1);
                    }
                    assign[vi] = -1;
                };
                fill(0);
                return;
            }
            const auto& at = rd.body[ai];
            auto try_tuple = [&](Packed pk, bool from_delta) {
                // Unpack and match against current assignment.
                std::vector<int> vals(at.arity);
                Packed q = pk;
                for (int pos = at.arity - 1; pos >= 0; --pos) {
                    vals[pos] = static_cast<int>(q & 0xff) - 1;
                    q >>= 8;
                }
                std::vector<int> touched;
                bool ok = true;
                for (int pos = 0; pos < at.arity && ok; ++pos) {
                    int s = at.slots[pos];
                    if (assign[s] < 0) {
                        assign[s] = vals[pos];
                        touched.push_back(s);
                    } else if (assign[s] != vals[pos]) {
                        ok = false;
                    }
                }
                if (ok) rec(ai + 1, used_delta || from_delta);
                for (int s : touched) assign[s] = -1;
            };
            if (at.idb) {
                // Iterate known facts of this predicate in packed order.
                FactKey lo{at.pred_id, 0};
                for (auto it = full.lower_bound(lo); it != full.end() && it->pred == at.pred_id;
                     ++it) {
                    bool from_delta = delta_set && delta_set->count(*it) > 0;
                    try_tuple(it->tuple, from_delta);
                }
            } else {
                auto lit = in.edb_list.find(at.edb_name);
                if (lit == in.edb_list.end()) return;
                for (Packed pk : lit->second) try_tuple(pk, false);
            }
        };
        rec(0, false);
    };

    auto head_key = [&](std::size_t ri, const std::vector<int>& assign) {
        const auto& h = rds[ri].head;
        std::vector<int> t(h.arity);
        for (int pos = 0; pos < h.arity; ++pos) t[pos] = assign[h.slots[pos]];
        return FactKey{h.pred_id, Interned::pack(t)};
    };

    auto body_idb_key = [&](std::size_t ri, const std::vector<int>& assign) -> std::optional<FactKey> {
        const auto& rd = rds[ri];
        for (const auto& at : rd.body) {
            if (!at.idb) continue;
            std::vector<int> t(at.arity);
            for (int pos = 0; pos < at.arity; ++pos) t[pos] = assign[at.slots[pos]];
            return FactKey{at.pred_id, Interned::pack(t)};
        }
        return std::nullopt;
    };

    // Round-buffered derivation: candidates discovered this round commit at
    // the end, keyed by (rule index, assignment) minimality.
    std::map<FactKey, Provenance> round_new;
    auto offer = [&](std::size_t ri, const std::vector<int>& assign) {
        FactKey k = head_key(ri, assign);
        if (known.count(k)) return;
        auto it = round_new.find(k);
        if (it != round_new.end()) {
            // Keep the first derivation within a round: lowest rule index,
            // then lexicographically least assignment.
            if (std::tie(it->second.rule, it->second.assignment) <=
                std::make_tuple(static_cast<int>(ri), assign))
                return;
            it->second = Provenance{static_cast<int>(ri), assign, body_idb_key(ri, assign)};
            return;
        }
        round_new.emplace(k, Provenance{static_cast<int>(ri), assign, body_idb_key(ri, assign)});
        if (static_cast<std::int64_t>(known.size() + round_new.size()) > limits.max_facts)
            throw ResourceError("evaluate: fact budget exceeded");
    };

    // Round 0: nonrecursive rules.
    for (std::size_t ri = 0; ri < p.rules.size(); ++ri) {
        if (rds[ri].n_idb > 0) continue;
        run_rule(ri, known, nullptr, [&](const std::vector<int>& assign) { offer(ri, assign); });
    }

    bool accepted = false;
    while (!round_new.empty() && !accepted) {
        ++res.rounds;
        delta.clear();
        for (auto& [k, pr] : round_new) {
            known.insert(k);
            prov.emplace(k, std::move(pr));
            delta.push_back(k);
            if (k.pred == goal_id) accepted = true;
        }
        round_new.clear();
        if (accepted) break;
        std::set<FactKey> delta_set(delta.begin(), delta.end());
        for (std::size_t ri = 0; ri < p.rules.size(); ++ri) {
            if (rds[ri].n_idb == 0) continue;
            run_rule(ri, known, &delta_set,
                     [&](const std::vector<int>& assign) { offer(ri, assign); });
        }
    }
    res.derived_facts = static_cast<std::int64_t>(known.size());
    res.accepted = accepted;

    if (accepted && want_witness) {
        // Walk provenance back from the goal fact.
        std::vector<DerivationStep> rev;
        FactKey cur{goal_id, Interned::pack({})};
        while (true) {
            const auto& pr = prov.at(cur);
            DerivationStep st;
            st.rule = pr.rule;
            const auto& rd = rds[pr.rule];
            for (std::size_t vi = 0; vi < rd.vars.size(); ++vi)
                st.assignment[rd.vars[vi]] = in.elems[pr.assignment[vi]];
            rev.push_back(std::move(st));
            if (!pr.prev) break;
            cur = *pr.prev;
        }
        Derivation d;
        d.steps.assign(rev.rbegin(), rev.rend());
        auto val = validate_derivation(p, d, &a);
        if (!val.ok) throw std::logic_error("internal: reconstructed witness failed validation");
        res.witness = std::move(d);
    }
    return res;
}

std::optional<Derivation> search_read_once_derivation(const DatalogProgram& p, const Structure& a,
                                                      const ReadOnceSearchLimits& limits) {
    auto frag = classify_fragment(p).fragment;
    if (frag == Fragment::general)
        throw InputError("search_read_once_derivation: program is not linear");

    // Count instantiated non-built-in EDB facts for the default depth bound.
    std::int64_t edb_facts = 0;
    for (const auto& [name, arity] : p.edb.symbols) {
        if (!a.vocab().has(name))
            throw InputError("search_read_once_derivation: input lacks relation '" + name + "'");
        edb_facts += static_cast<std::int64_t>(a.relation(name).size());
    }
    int max_depth = limits.max_depth > 0 ? limits.max_depth
                                         : static_cast<int>(2 * edb_facts + 2);

    std::int64_t nodes = 0;
    using Used = std::set<std::pair<std::string, Tuple>>;

    // Enumerate assignments of a rule in lex order, with the body IDB atom
    // (if any) pinned to `fact`; sink gets the assignment and the step's
    // fresh non-built-in EDB instantiations.
    auto instantiate = [&](const DatalogRule& rule,
                           const std::optional<std::pair<std::string, Tuple>>& fact,
                           const Used& used,
                           const std::function<bool(const std::map<std::string, std::string>&,
                                                    const std::vector<std::pair<std::string, Tuple>>&)>& sink)
        -> bool {
        auto vars = rule.variables();
        std::map<std::string, std::string> assign;
        if (fact) {
            auto idbs = rule.body_idb(p);
            const auto& link = *idbs[0];
            for (std::size_t pos = 0; pos < link.vars.size(); ++pos) {
                auto it = assign.find(link.vars[pos]);
                if (it != assign.end() && it->second != fact->second[pos]) return false;
                assign[link.vars[pos]] = fact->second[pos];
            }
        }
        std::function<bool(std::size_t)> fill = [&](std::size_t vi) -> bool {
            if (++nodes > limits.max_nodes)
                throw ResourceError("read-once search exceeded node budget");
            if (vi == vars.size()) {
                // Check EDB atoms and collect fresh ones.
                std::vector<std::pair<std::string, Tuple>> step_atoms;
                Used step_seen;
                for (const auto& at : rule.body) {
                    if (p.is_idb(at.pred)) continue;
                    Tuple t;
                    for (const auto& v : at.vars) t.push_back(assign.at(v));
                    if (!a.vocab().has(at.pred) || !a.relation(at.pred).count(t)) return false;
                    if (is_builtin_predicate(at.pred)) continue;
                    std::pair<std::string, Tuple> key{at.pred, t};
                    if (used.count(key) || step_seen.count(key)) return false;
                    step_seen.insert(key);
                    step_atoms.emplace_back(at.pred, std::move(t));
                }
                return sink(assign, step_atoms);
            }
            const auto& v = vars[vi];
            if (assign.count(v)) return fill(vi + 1);
            for (const auto& e : a.domain()) {
                assign[v] = e;
                if (fill(vi + 1)) return true;
                assign.erase(v);
            }
            return false;
        };
        return fill(0);
    };

    std::optional<Derivation> found;
    std::vector<DerivationStep> trail;

    std::function<bool(const std::optional<std::pair<std::string, Tuple>>&, Used&, int)> dfs =
        [&](const std::optional<std::pair<std::string, Tuple>>& fact, Used& used,
            int depth_left) -> bool {
        if (depth_left <= 0) return false;
        for (std::size_t ri = 0; ri < p.rules.size(); ++ri) {
            const auto& rule = p.rules[ri];
            auto idbs = rule.body_idb(p);
            bool starting = !fact;
            if (starting && !idbs.empty()) continue;
            if (!starting && (idbs.size() != 1 || idbs[0]->pred != fact->first)) continue;
            bool done = instantiate(
                rule, fact, used,
                [&](const std::map<std::string, std::string>& assign,
                    const std::vector<std::pair<std::string, Tuple>>& fresh) -> bool {
                    DerivationStep st{static_cast<int>(ri), assign};
                    trail.push_back(st);
                    for (const auto& f : fresh) used.insert(f);
                    bool ok;
                    if (rule.is_goal) {
                        Derivation d;
                        d.steps = trail;
                        found = std::move(d);
                        ok = true;
                    } else {
                        std::pair<std::string, Tuple> head_fact{rule.head.pred, {}};
                        for (const auto& v : rule.head.vars)
                            head_fact.second.push_back(assign.at(v));
                        ok = dfs(head_fact, used, depth_left - 1);
                    }
                    if (!ok) {
                        for (const auto& f : fresh) used.erase(f);
                        trail.pop_back();
                    }
                    return ok;
                });
            if (done) return true;
        }
        return false;
    };

    for (int bound = 1; bound <= max_depth; ++bound) {
        Used used;
        trail.clear();
        std::optional<std::pair<std::string, Tuple>> none;
        if (dfs(none, used, bound)) {
            auto val = validate_derivation(p, *found, &a);
            if (!val.ok) throw std::logic_error("internal: read-once search produced invalid derivation");
            return found;
        }
    }
    return std::nullopt;
}

} // namespace cspb
