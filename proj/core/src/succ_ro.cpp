#include "cspb/succ_ro.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "cspb/errors.hpp"

namespace cspb {

namespace {

const char* kBuiltinNames[] = {"first", "last", "suc"};

std::set<std::string> element_set(const Structure& s) {
    return {s.domain().begin(), s.domain().end()};
}

} // namespace

SuccessorStructure SuccessorStructure::attach(const Structure& a,
                                              const std::map<std::string, int>& ordering) {
    int n = static_cast<int>(a.domain().size());
    if (n == 0) throw InputError("attach: empty domain");
    for (const char* b : kBuiltinNames)
        if (a.vocab().has(b))
            throw InputError(std::string("attach: vocabulary already contains '") + b + "'");
    std::vector<char> hit(n, 0);
    std::map<std::string, std::string> rename;
    for (const auto& e : a.domain()) {
        auto it = ordering.find(e);
        if (it == ordering.end()) throw InputError("attach: ordering misses '" + e + "'");
        if (it->second < 1 || it->second > n || hit[it->second - 1])
            throw InputError("attach: ordering is not a bijection onto {1.." +
                             std::to_string(n) + "}");
        hit[it->second - 1] = 1;
        rename[e] = std::to_string(it->second);
    }
    return SuccessorStructure{a.renamed(rename), n};
}

SuccessorStructure SuccessorStructure::from_numbered(const Structure& a) {
    std::map<std::string, int> ordering;
    int n = static_cast<int>(a.domain().size());
    for (int i = 1; i <= n; ++i) {
        std::string name = std::to_string(i);
        if (!a.has_element(name))
            throw InputError("from_numbered: domain is not {1.." + std::to_string(n) + "}");
        ordering[name] = i;
    }
    return attach(a, ordering);
}

Structure SuccessorStructure::with_builtins() const {
    Vocabulary order({{"first", 1}, {"last", 1}, {"suc", 2}});
    auto rels = base.relations();
    rels["first"] = {{"1"}};
    rels["last"] = {{std::to_string(n)}};
    std::set<Tuple> suc;
    for (int i = 1; i < n; ++i) suc.insert({std::to_string(i), std::to_string(i + 1)});
    rels["suc"] = std::move(suc);
    return Structure(base.vocab().merged_with(order), base.domain(), std::move(rels));
}

std::vector<Occurrence> occurrence_set(const Structure& a, const std::string& elem) {
    std::vector<Occurrence> out;
    for (const auto& [rel, tuples] : a.relations())
        for (const Tuple& t : tuples)
            for (int i = 0; i < static_cast<int>(t.size()); ++i)
                if (t[i] == elem) out.push_back({rel, t, i});
    std::sort(out.begin(), out.end());
    return out;
}

Structure split_structure(const Structure& a, const std::string& elem,
                          const std::vector<Occurrence>& chosen) {
    auto all = occurrence_set(a, elem);
    if (all.size() < 2) throw InputError("split: '" + elem + "' has fewer than two occurrences");
    std::set<Occurrence> pick(chosen.begin(), chosen.end());
    if (pick.empty()) throw InputError("split: empty occurrence selection");
    if (pick.size() >= all.size()) throw InputError("split: selection must be a strict subset");
    for (const Occurrence& o : pick)
        if (!std::binary_search(all.begin(), all.end(), o))
            throw InputError("split: selection contains a non-occurrence");

    std::string fresh = elem + "'";
    while (a.has_element(fresh)) fresh += "'";

    std::map<std::string, std::set<Tuple>> rels;
    for (const auto& [rel, tuples] : a.relations()) {
        std::set<Tuple>& out = rels[rel];
        for (const Tuple& t : tuples) {
            Tuple nt = t;
            for (int i = 0; i < static_cast<int>(t.size()); ++i)
                if (pick.count({rel, t, i})) nt[i] = fresh;
            out.insert(std::move(nt));
        }
        if (out.size() != tuples.size())
            throw std::logic_error("split: rewrite collided two tuples");
    }
    std::vector<std::string> dom = a.domain();
    dom.push_back(fresh);
    return Structure(a.vocab(), std::move(dom), std::move(rels));
}

Structure minimize_in_class(const Structure& a, const MembershipOracle& member) {
    if (!member(a)) throw InputError("minimize_in_class: the start structure is not in the class");
    Structure cur = a;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [rel, tuples] : cur.relations()) {
            for (const Tuple& t : tuples) {
                auto rels = cur.relations();
                rels[rel].erase(t);
                Structure cand(cur.vocab(), cur.domain(), std::move(rels));
                if (member(cand)) {
                    cur = std::move(cand);
                    changed = true;
                    break;
                }
            }
            if (changed) break;
        }
        if (changed) continue;
        for (const std::string& x : cur.domain()) {
            std::set<std::string> keep = element_set(cur);
            keep.erase(x);
            Structure cand = cur.induced(keep);
            if (member(cand)) {
                cur = std::move(cand);
                changed = true;
                break;
            }
        }
        if (changed) continue;
        for (const std::string& x : cur.domain()) {
            auto occ = occurrence_set(cur, x);
            if (occ.size() < 2) continue;
            if (occ.size() > 16)
                throw ResourceError("minimize_in_class: occurrence set of '" + x +
                                    "' too large to enumerate");
            std::uint32_t total = 1u << occ.size();
            for (std::uint32_t mask = 1; mask + 1 < total && !changed; ++mask) {
                std::vector<Occurrence> pick;
                for (std::size_t i = 0; i < occ.size(); ++i)
                    if (mask & (1u << i)) pick.push_back(occ[i]);
                Structure cand = split_structure(cur, x, pick);
                if (member(cand)) {
                    cur = std::move(cand);
                    changed = true;
                }
            }
            if (changed) break;
        }
    }
    if (!find_homomorphism(cur, a))
        throw std::logic_error("minimize_in_class: result does not map back to the input");
    return cur;
}

MnbpRun evaluate_mnbp(const Mnbp& h, const SuccessorStructure& a) {
    if (h.n != a.n) throw InputError("evaluate_mnbp: input size mismatch");
    if (!h.vocab.same_symbols(a.base.vocab()))
        throw InputError("evaluate_mnbp: vocabulary mismatch");

    auto live = [&](const MnbpArc& arc) {
        if (!arc.label) return true;
        return a.base.relation(arc.label->rel).count(arc.label->tuple) > 0;
    };
    std::vector<std::vector<int>> out(h.size());
    for (int i = 0; i < static_cast<int>(h.arcs.size()); ++i) out[h.arcs[i].from].push_back(i);

    std::vector<int> via(h.size(), -1);
    std::vector<char> seen(h.size(), 0);
    std::deque<int> queue{h.source()};
    seen[h.source()] = 1;
    while (!queue.empty() && !seen[h.sink()]) {
        int u = queue.front();
        queue.pop_front();
        for (int ai : out[u]) {
            if (!live(h.arcs[ai])) continue;
            int v = h.arcs[ai].to;
            if (seen[v]) continue;
            seen[v] = 1;
            via[v] = ai;
            queue.push_back(v);
        }
    }
    MnbpRun run;
    if (!seen[h.sink()]) return run;
    run.accepted = true;
    for (int v = h.sink(); via[v] != -1; v = h.arcs[via[v]].from) run.path.push_back(via[v]);
    std::reverse(run.path.begin(), run.path.end());
    run.read_once = true;
    std::set<MnbpLabel> used;
    for (int ai : run.path)
        if (h.arcs[ai].label && !used.insert(*h.arcs[ai].label).second) {
            run.read_once = false;
            break;
        }
    return run;
}

Mnbp compile_to_mnbp(const DatalogProgram& p, int n, const CompileLimits& limits) {
    if (n < 1) throw InputError("compile_to_mnbp: n must be positive");
    FragmentReport fr = classify_fragment(p);
    if (fr.fragment == Fragment::general)
        throw InputError("compile_to_mnbp: program is not linear");

    Mnbp h;
    h.n = n;
    h.vocab = p.edb;
    h.node_names = {"s", "t"};

    std::map<std::pair<std::string, Tuple>, int> state_id;
    auto state = [&](const std::string& idb, const Tuple& t) {
        auto [it, fresh] = state_id.try_emplace({idb, t}, h.size());
        if (fresh) {
            std::string name = idb;
            if (!t.empty()) {
                name += '(';
                for (std::size_t i = 0; i < t.size(); ++i) {
                    if (i) name += ',';
                    name += t[i];
                }
                name += ')';
            }
            h.node_names.push_back(name);
        }
        return it->second;
    };
    auto builtin_holds = [&](const std::string& pred, const Tuple& t) {
        if (pred == "first") return t[0] == "1";
        if (pred == "last") return t[0] == std::to_string(n);
        return std::stoi(t[0]) + 1 == std::stoi(t[1]);
    };

    std::vector<std::string> numbers;
    for (int i = 1; i <= n; ++i) numbers.push_back(std::to_string(i));

    std::set<std::tuple<int, int, std::vector<MnbpLabel>>> emitted;
    for (std::size_t r = 0; r < p.rules.size(); ++r) {
        const DatalogRule& rule = p.rules[r];
        auto vars = rule.variables();
        double est = 1;
        for (std::size_t i = 0; i < vars.size(); ++i) est *= n;
        if (est > static_cast<double>(limits.max_instantiations))
            throw ResourceError("compile_to_mnbp: instantiation budget exceeded at rule " +
                                std::to_string(r));

        std::vector<int> odo(vars.size(), 0);
        while (true) {
            std::map<std::string, std::string> asg;
            for (std::size_t i = 0; i < vars.size(); ++i) asg[vars[i]] = numbers[odo[i]];

            auto value_of = [&](const std::vector<std::string>& atom_vars) {
                Tuple t;
                for (const auto& v : atom_vars) t.push_back(asg.at(v));
                return t;
            };
            bool ok = true;
            int from = h.source();
            std::vector<MnbpLabel> labels;
            for (const DatalogAtom& at : rule.body) {
                Tuple t = value_of(at.vars);
                if (p.is_idb(at.pred)) {
                    from = state(at.pred, t);
                } else if (is_builtin_predicate(at.pred)) {
                    if (!builtin_holds(at.pred, t)) {
                        ok = false;
                        break;
                    }
                } else {
                    labels.push_back({at.pred, std::move(t)});
                }
            }
            if (ok) {
                int to = rule.is_goal ? h.sink() : state(rule.head.pred, value_of(rule.head.vars));
                if (emitted.insert({from, to, labels}).second) {
                    if (labels.empty()) {
                        h.arcs.push_back({from, to, std::nullopt});
                    } else {
                        int prev = from;
                        for (std::size_t i = 0; i + 1 < labels.size(); ++i) {
                            int aux = h.size();
                            h.node_names.push_back("aux" + std::to_string(aux));
                            h.arcs.push_back({prev, aux, labels[i]});
                            prev = aux;
                        }
                        h.arcs.push_back({prev, to, labels.back()});
                    }
                }
            }
            std::size_t carry = 0;
            while (carry < odo.size() && ++odo[carry] == n) odo[carry++] = 0;
            if (carry == odo.size()) break;
        }
    }

    h.idb_states = static_cast<int>(state_id.size());
    int kappa = 0;
    for (const auto& [name, ar] : p.idb.symbols) kappa = std::max(kappa, ar);
    long long bound = static_cast<long long>(p.idb.symbols.size());
    for (int i = 0; i < kappa; ++i) bound *= n;
    h.state_bound = static_cast<int>(std::min<long long>(bound, 1 << 30));
    if (h.idb_states > h.state_bound)
        throw std::logic_error("compile_to_mnbp: state count escaped its bound");
    return h;
}

namespace {

// The non-built-in EDB atoms of one derivation step, instantiated.
std::map<std::string, std::set<Tuple>> step_tuples(const DatalogProgram& p,
                                                   const DerivationStep& step) {
    std::map<std::string, std::set<Tuple>> out;
    const DatalogRule& rule = p.rules[step.rule];
    for (const DatalogAtom& at : rule.body) {
        if (p.is_idb(at.pred) || is_builtin_predicate(at.pred)) continue;
        Tuple t;
        for (const auto& v : at.vars) t.push_back(step.assignment.at(v));
        out[at.pred].insert(std::move(t));
    }
    return out;
}

Structure tuples_to_structure(const Vocabulary& vocab,
                              const std::map<std::string, std::set<Tuple>>& rels) {
    std::set<std::string> dom;
    for (const auto& [rel, tuples] : rels)
        for (const Tuple& t : tuples) dom.insert(t.begin(), t.end());
    return Structure(vocab, {dom.begin(), dom.end()}, rels);
}

struct EmbedderRun {
    std::map<std::string, int> phi;
    Derivation derivation;
    std::vector<Structure> bags;
    std::vector<int> bag_step;
    std::vector<Structure> prototype;
    std::string key;
    std::set<std::string> elements; // of the extracted structure
};

} // namespace

std::optional<SurgeryTrace> surgery_experiment(const DatalogProgram& p, const Structure& m, int n,
                                               const SurgeryBudget& budget) {
    FragmentReport fr = classify_fragment(p);
    if (fr.fragment == Fragment::general)
        throw InputError("surgery_experiment: program is not linear");
    int s = static_cast<int>(m.domain().size());
    if (s == 0) throw InputError("surgery_experiment: empty structure");
    if (n < s || n % s != 0)
        throw InputError("surgery_experiment: n must be a positive multiple of the domain size");
    int block = n / s;
    int j = fr.j;

    std::vector<std::string> all_numbers;
    for (int i = 1; i <= n; ++i) all_numbers.push_back(std::to_string(i));

    std::vector<EmbedderRun> runs;
    std::vector<int> digits(s, 0);
    for (int produced = 0; produced < budget.max_embedders;) {
        std::map<std::string, int> phi;
        std::map<std::string, std::string> rename;
        for (int i = 0; i < s; ++i) {
            int value = i * block + digits[i] + 1;
            phi[m.domain()[i]] = value;
            rename[m.domain()[i]] = std::to_string(value);
        }
        Structure renamed = m.renamed(rename);
        Structure padded(renamed.vocab(), all_numbers, renamed.relations());
        SuccessorStructure succ{padded, n};

        if (auto d = search_read_once_derivation(p, succ.with_builtins(), budget.derivation)) {
            EmbedderRun run;
            run.phi = phi;
            run.derivation = std::move(*d);
            std::map<std::string, std::string> back;
            for (const auto& [elem, value] : phi) back[std::to_string(value)] = elem;
            for (std::size_t step = 0; step < run.derivation.steps.size(); ++step) {
                auto rels = step_tuples(p, run.derivation.steps[step]);
                bool empty = true;
                for (const auto& [rel, tuples] : rels) empty = empty && tuples.empty();
                if (empty) continue;
                Structure bag = tuples_to_structure(p.edb, rels);
                std::map<std::string, std::set<Tuple>> pulled;
                for (const auto& [rel, tuples] : rels)
                    for (const Tuple& t : tuples) {
                        Tuple back_t;
                        for (const auto& e : t) back_t.push_back(back.at(e));
                        pulled[rel].insert(std::move(back_t));
                    }
                run.bag_step.push_back(static_cast<int>(step));
                run.bags.push_back(std::move(bag));
                run.prototype.push_back(tuples_to_structure(p.edb, pulled));
                for (const auto& e : run.bags.back().domain()) run.elements.insert(e);
            }
            for (const Structure& proto : run.prototype) run.key += print_structure(proto) + "\x1f";
            runs.push_back(std::move(run));
            ++produced;
        }

        int carry = 0;
        while (carry < s && ++digits[carry] == block) digits[carry++] = 0;
        if (carry == s) break;
    }

    std::map<std::string, std::vector<int>> groups;
    for (int i = 0; i < static_cast<int>(runs.size()); ++i) groups[runs[i].key].push_back(i);

    for (const auto& [key, members] : groups) {
        if (members.size() < 2) continue;
        const auto& proto = runs[members.front()].prototype;
        int w = static_cast<int>(proto.size());

        std::vector<std::set<std::string>> prefix(w), suffix(w);
        std::set<std::string> acc;
        for (int g = 0; g < w; ++g) {
            for (const auto& e : proto[g].domain()) acc.insert(e);
            prefix[g] = acc;
        }
        acc.clear();
        for (int g = w - 1; g >= 0; --g) {
            for (const auto& e : proto[g].domain()) acc.insert(e);
            suffix[g] = acc;
        }
        int cut = -1;
        for (int g = 0; g + 1 < w; ++g) {
            std::vector<std::string> inter;
            std::set_intersection(prefix[g].begin(), prefix[g].end(), suffix[g + 1].begin(),
                                  suffix[g + 1].end(), std::back_inserter(inter));
            if (static_cast<int>(inter.size()) > j) {
                cut = g;
                break;
            }
        }
        if (cut < 0) continue;

        // Cut states of every member at the chosen prototype bag.
        std::map<std::pair<std::string, Tuple>, std::vector<int>> by_state;
        for (int idx : members) {
            const EmbedderRun& run = runs[idx];
            const DerivationStep& step = run.derivation.steps[run.bag_step[cut]];
            const DatalogRule& rule = p.rules[step.rule];
            Tuple head;
            for (const auto& v : rule.head.vars) head.push_back(step.assignment.at(v));
            by_state[{rule.head.pred, head}].push_back(idx);
        }

        std::int64_t scanned = 0;
        for (const auto& [state, idxs] : by_state) {
            for (int ia : idxs)
                for (int ib : idxs) {
                    if (ia == ib) continue;
                    if (++scanned > budget.max_pairs) return std::nullopt;
                    const EmbedderRun& ra = runs[ia];
                    const EmbedderRun& rb = runs[ib];
                    std::vector<std::string> shared;
                    std::set_intersection(ra.elements.begin(), ra.elements.end(),
                                          rb.elements.begin(), rb.elements.end(),
                                          std::back_inserter(shared));
                    if (static_cast<int>(shared.size()) > j) continue;

                    Derivation spliced;
                    for (int t = 0; t <= ra.bag_step[cut]; ++t)
                        spliced.steps.push_back(ra.derivation.steps[t]);
                    for (std::size_t t = rb.bag_step[cut] + 1; t < rb.derivation.steps.size(); ++t)
                        spliced.steps.push_back(rb.derivation.steps[t]);
                    ValidationResult vr = validate_derivation(p, spliced);
                    if (!vr.ok)
                        throw std::logic_error("surgery_experiment: spliced derivation invalid");

                    Structure extracted = extract_structure(p, spliced);
                    Structure whole_proto = union_structures(proto);

                    std::map<std::string, std::string> collapse;
                    bool total = true;
                    for (const auto& e : extracted.domain()) {
                        int value = std::stoi(e);
                        int blk = (value - 1) / block;
                        if (blk < 0 || blk >= s) {
                            total = false;
                            break;
                        }
                        collapse[e] = m.domain()[blk];
                    }
                    bool variant = total;
                    if (variant) {
                        std::set<std::string> image;
                        for (const auto& [from, to] : collapse) image.insert(to);
                        variant = image == element_set(whole_proto);
                    }
                    if (variant) {
                        for (const auto& [rel, tuples] : extracted.relations()) {
                            std::set<Tuple> mapped;
                            for (const Tuple& t : tuples) {
                                Tuple img;
                                for (const auto& e : t) img.push_back(collapse.at(e));
                                mapped.insert(std::move(img));
                            }
                            if (mapped.size() != tuples.size() ||
                                mapped != whole_proto.relation(rel)) {
                                variant = false;
                                break;
                            }
                        }
                    }
                    int added = static_cast<int>(extracted.domain().size()) -
                                static_cast<int>(whole_proto.domain().size());

                    return SurgeryTrace{runs[ia].phi,
                                        runs[ib].phi,
                                        ra.bags,
                                        rb.bags,
                                        proto,
                                        cut,
                                        state.first,
                                        state.second,
                                        ra.derivation,
                                        rb.derivation,
                                        std::move(spliced),
                                        std::move(extracted),
                                        std::move(collapse),
                                        vr.ok,
                                        variant && added > 0,
                                        added};
                }
        }
    }
    return std::nullopt;
}

CutDecomposition build_cut_decomposition(const std::vector<Structure>& bags, int j, int k) {
    if (bags.empty()) throw InputError("build_cut_decomposition: no bags");
    if (j < 0 || k < 0) throw InputError("build_cut_decomposition: negative width");
    for (const Structure& b : bags) {
        if (!b.vocab().same_symbols(bags.front().vocab()))
            throw InputError("build_cut_decomposition: mixed vocabularies");
        if (static_cast<int>(b.domain().size()) > k)
            throw InputError("build_cut_decomposition: bag exceeds k elements");
    }
    int w = static_cast<int>(bags.size());
    std::vector<std::set<std::string>> prefix(w), suffix(w);
    std::set<std::string> acc;
    for (int g = 0; g < w; ++g) {
        for (const auto& e : bags[g].domain()) acc.insert(e);
        prefix[g] = acc;
    }
    acc.clear();
    for (int g = w - 1; g >= 0; --g) {
        for (const auto& e : bags[g].domain()) acc.insert(e);
        suffix[g] = acc;
    }
    for (int g = 0; g + 1 < w; ++g) {
        std::vector<std::string> inter;
        std::set_intersection(prefix[g].begin(), prefix[g].end(), suffix[g + 1].begin(),
                              suffix[g + 1].end(), std::back_inserter(inter));
        if (static_cast<int>(inter.size()) > j) return {std::nullopt, g + 1};
    }

    std::vector<Structure> out;
    for (int g = 0; g < w; ++g) {
        std::vector<std::string> dom = bags[g].domain();
        if (g > 0 && g + 1 < w) {
            std::set_intersection(prefix[g - 1].begin(), prefix[g - 1].end(),
                                  suffix[g + 1].begin(), suffix[g + 1].end(),
                                  std::back_inserter(dom));
        }
        out.push_back(Structure(bags[g].vocab(), std::move(dom), bags[g].relations()));
    }
    PathRepresentation rep{std::move(out), j, k + j};
    Structure whole = union_structures(bags);
    RepReport rr = validate_representation(rep, &whole);
    if (!rr.ok) throw std::logic_error("build_cut_decomposition: assembled bags fail validation");
    return {std::move(rep), 0};
}

} // namespace cspb
