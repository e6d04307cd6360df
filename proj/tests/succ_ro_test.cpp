#include <random>
#include <string>

#include "cspb/errors.hpp"
#include "cspb/succ_ro.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cspb;

namespace {

const char* kStConn =
    "edb E/2, S/1, T/1.\n"
    "idb I/1, G/0.\n"
    "goal G.\n"
    "I(x) :- S(x).\n"
    "I(y) :- I(x), E(x,y).\n"
    "G :- I(x), T(x).\n";

// even-size detector over complete loopless digraphs: the first block walks
// the order two steps at a time, the second re-checks both arc directions
const char* kEvenClique =
    "edb E/2.\n"
    "idb I/1, J/2, G1/0, G2/0.\n"
    "goal G2.\n"
    "I(y) :- first(x), suc(x,y).\n"
    "I(z) :- I(x), suc(x,y), suc(y,z).\n"
    "G1 :- I(x), last(x).\n"
    "J(x,y) :- G1, first(x), first(y).\n"
    "J(x,z) :- J(x,y), suc(y,z), E(x,z), E(z,x).\n"
    "J(z,w) :- J(x,y), last(y), suc(x,z), suc(z,w), E(z,w), E(w,z).\n"
    "G2 :- J(x,y), suc(x,y), last(y).\n";

Structure digon() {
    return parse_structure("domain: a b\nE/2: (a,b) (b,a)\n");
}

Structure sym_cycle(int n) {
    std::vector<std::string> dom;
    std::map<std::string, std::set<Tuple>> rel;
    for (int i = 0; i < n; ++i) dom.push_back(std::to_string(i));
    for (int i = 0; i < n; ++i) {
        rel["E"].insert({dom[i], dom[(i + 1) % n]});
        rel["E"].insert({dom[(i + 1) % n], dom[i]});
    }
    return Structure(Vocabulary{{{"E", 2}}}, dom, rel);
}

Structure clique(int n) {
    std::vector<std::string> dom;
    std::map<std::string, std::set<Tuple>> rel;
    rel["E"];
    for (int i = 1; i <= n; ++i) dom.push_back(std::to_string(i));
    for (const auto& u : dom)
        for (const auto& v : dom)
            if (u != v) rel["E"].insert({u, v});
    return Structure(Vocabulary{{{"E", 2}}}, dom, rel);
}

} // namespace

TEST_CASE("successor attachment and generated order") {
    SuccessorStructure s = SuccessorStructure::attach(digon(), {{"a", 1}, {"b", 2}});
    CHECK(s.n == 2);
    CHECK(s.base.relation("E").count({"1", "2"}));
    Structure full = s.with_builtins();
    CHECK(full.relation("first").count({"1"}));
    CHECK(full.relation("last").count({"2"}));
    CHECK(full.relation("suc").count({"1", "2"}));
    CHECK(full.relation("suc").size() == 1);

    CHECK_THROWS_AS(SuccessorStructure::attach(digon(), {{"a", 1}, {"b", 1}}), InputError);
    CHECK_THROWS_AS(SuccessorStructure::attach(digon(), {{"a", 1}}), InputError);
}

TEST_CASE("occurrences and splitting") {
    Structure d = digon();
    auto occ = occurrence_set(d, "a");
    REQUIRE(occ.size() == 2);
    CHECK(occ[0] == Occurrence{"E", {"a", "b"}, 0});
    CHECK(occ[1] == Occurrence{"E", {"b", "a"}, 1});

    Structure split = split_structure(d, "a", {occ[0]});
    CHECK(split.domain().size() == 3);
    CHECK(split.relation("E").count({"a'", "b"}));
    CHECK(split.relation("E").count({"b", "a"}));
    CHECK(split.relation("E").size() == 2);
    CHECK(homomorphic(split, d)); // collapse the primed copy back

    CHECK_THROWS_AS(split_structure(d, "a", {}), InputError);
    CHECK_THROWS_AS(split_structure(d, "a", occ), InputError);
    Structure p2 = parse_structure("domain: a b c\nE/2: (a,b) (b,c)\n");
    CHECK_THROWS_AS(split_structure(p2, "c", {{"E", {"b", "c"}, 1}}), InputError);
}

TEST_CASE("random splits always map back onto the original") {
    std::mt19937 rng(31);
    for (int round = 0; round < 40; ++round) {
        Structure a = oracle::mask_digraph(3, rng() & 0x1ff);
        for (const std::string& x : a.domain()) {
            auto occ = occurrence_set(a, x);
            if (occ.size() < 2) continue;
            std::vector<Occurrence> pick{occ[rng() % occ.size()]};
            Structure s = split_structure(a, x, pick);
            CHECK(homomorphic(s, a));
            CHECK(s.relation("E").size() == a.relation("E").size());
            break;
        }
    }
}

TEST_CASE("greedy minimization lands on an orientation of the odd cycle") {
    Structure k2 = digon();
    MembershipOracle not_two_colorable = [&](const Structure& s) { return !homomorphic(s, k2); };
    Structure start = sym_cycle(5);
    Structure out = minimize_in_class(start, not_two_colorable);
    CHECK(out.relation("E").size() == 5);
    CHECK(out.domain().size() == 5);
    CHECK(not_two_colorable(out));
    CHECK(homomorphic(out, start));

    // every single tuple is now critical
    for (const Tuple& t : out.relation("E")) {
        auto rels = out.relations();
        rels["E"].erase(t);
        CHECK_FALSE(not_two_colorable(Structure(out.vocab(), out.domain(), rels)));
    }

    Structure p3 = parse_structure("domain: a b c\nE/2: (a,b) (b,c)\n");
    CHECK_THROWS_AS(minimize_in_class(p3, not_two_colorable), InputError);
}

TEST_CASE("grounded branching program matches the interpreter") {
    DatalogProgram p = parse_program(kStConn);
    Mnbp h = compile_to_mnbp(p, 3);
    CHECK(h.size() == 5);
    CHECK(h.idb_states == 3);
    CHECK(h.state_bound == 6);
    CHECK(h.arcs.size() == 15);
    CHECK(h.idb_states <= h.state_bound);

    for (std::uint64_t mask = 0; mask < (1u << 9); ++mask) {
        Structure a = oracle::mask_digraph(3, mask);
        MnbpRun run = evaluate_mnbp(h, SuccessorStructure::from_numbered(a));
        REQUIRE(run.accepted == evaluate(p, a).accepted);
        if (run.accepted) {
            REQUIRE_FALSE(run.path.empty());
            CHECK(h.arcs[run.path.front()].from == h.source());
            CHECK(h.arcs[run.path.back()].to == h.sink());
            for (std::size_t i = 0; i + 1 < run.path.size(); ++i)
                CHECK(h.arcs[run.path[i]].to == h.arcs[run.path[i + 1]].from);
            CHECK(run.read_once);
        }
    }

    Mnbp h4 = compile_to_mnbp(p, 4);
    CHECK_THROWS_AS(evaluate_mnbp(h4, SuccessorStructure::from_numbered(oracle::mask_digraph(3, 7))),
                    InputError);
}

TEST_CASE("parity program accepts exactly the even cliques") {
    DatalogProgram p = parse_program(kEvenClique);
    CHECK(classify_fragment(p).fragment == Fragment::linear);
    for (int n = 1; n <= 5; ++n) {
        Structure full = SuccessorStructure::from_numbered(clique(n)).with_builtins();
        CHECK(evaluate(p, full).accepted == (n % 2 == 0));
    }
    // a single missing arc breaks the re-check pass
    Structure k4 = clique(4);
    auto rels = k4.relations();
    rels["E"].erase({"2", "4"});
    Structure damaged(k4.vocab(), k4.domain(), rels);
    CHECK_FALSE(evaluate(p, SuccessorStructure::from_numbered(damaged).with_builtins()).accepted);
}

TEST_CASE("cut decomposition widens bags or reports the violation") {
    Structure p4 = parse_structure("domain: a b c d\nE/2: (a,b) (b,c) (c,d)\n");
    std::vector<Structure> bags{p4.induced({"a", "b"}), p4.induced({"b", "c"}),
                                p4.induced({"c", "d"})};
    CutDecomposition cd = build_cut_decomposition(bags, 1, 2);
    REQUIRE(cd.rep.has_value());
    CHECK(cd.rep->j <= 1);
    CHECK(cd.rep->k <= 3);
    CHECK(validate_representation(*cd.rep).ok);
    CHECK(represented_structure(*cd.rep) == represented_structure({bags, 1, 2}));

    // reusing two elements across the cut at once exceeds width one
    Structure h = parse_structure("domain: a b c\nE/2: (a,b) (b,c) (c,a)\n");
    std::vector<Structure> bad{h.induced({"a", "b"}), h.induced({"c"}), h.induced({"a", "b"})};
    CutDecomposition v = build_cut_decomposition(bad, 1, 2);
    CHECK_FALSE(v.rep.has_value());
    CHECK(v.violation_g == 1);
}

TEST_CASE("surgery on the digon yields a validated spliced derivation") {
    DatalogProgram p = parse_program(
        "edb E/2.\nidb J/1, G/0.\ngoal G.\nJ(v) :- E(u,v).\nG :- J(v), E(v,w).\n");
    auto trace = surgery_experiment(p, digon(), 4);
    REQUIRE(trace.has_value());
    CHECK(trace->spliced_valid);
    CHECK(validate_derivation(p, trace->spliced).ok);
    CHECK(trace->cut_idb == "J");
    CHECK_FALSE(trace->prototype.empty());
    CHECK(trace->cut_bag < static_cast<int>(trace->prototype.size()));

    // the spliced instantiation collapses block by block onto the prototype
    Homomorphism collapse{trace->extracted, union_structures(trace->prototype), trace->collapse};
    CHECK(verify_homomorphism(collapse));

    for (const auto& [elem, num] : trace->embedder_a) {
        CHECK(digon().has_element(elem));
        CHECK(num >= 1);
        CHECK(num <= 4);
    }
}
