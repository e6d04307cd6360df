#include <random>
#include <string>

#include "cspb/canonical.hpp"
#include "cspb/datalog.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cspb;

namespace {

Structure leq2() {
    return parse_structure("domain: 0 1\nE/2: (0,0) (0,1) (1,1)\n");
}

Structure cycle(int n) {
    std::vector<std::string> dom;
    std::map<std::string, std::set<Tuple>> rel;
    for (int i = 0; i < n; ++i) dom.push_back(std::to_string(i));
    for (int i = 0; i < n; ++i) {
        rel["E"].insert({dom[i], dom[(i + 1) % n]});
        rel["E"].insert({dom[(i + 1) % n], dom[i]});
    }
    return Structure(Vocabulary{{{"E", 2}}}, dom, rel);
}

Structure random_digraph(std::mt19937& rng, int n, double p) {
    std::vector<std::string> dom;
    for (int i = 0; i < n; ++i) dom.push_back(std::string(1, static_cast<char>('a' + i)));
    std::bernoulli_distribution arc(p);
    std::map<std::string, std::set<Tuple>> rel;
    rel["E"];
    for (const auto& u : dom)
        for (const auto& v : dom)
            if (arc(rng)) rel["E"].insert({u, v});
    return Structure(Vocabulary{{{"E", 2}}}, dom, rel);
}

} // namespace

TEST_CASE("canonical program shape at (1,2)") {
    CanonicalProgram cp = build_canonical(leq2(), 1, 2, CanonicalMode::linear);
    CHECK(cp.j == 1);
    CHECK(cp.k == 2);
    CHECK(cp.base.goal == "I0_0");
    REQUIRE(cp.subscript_index.count("I0_0"));
    CHECK(cp.subscript_index.at("I0_0").empty());
    // every IDB name decodes to a subset of B^r of the advertised size
    for (const auto& [name, tuples] : cp.subscript_index) {
        REQUIRE(cp.base.idb.has(name));
        int r = cp.base.idb.arity(name);
        for (const auto& t : tuples) CHECK(static_cast<int>(t.size()) == r);
    }
    FragmentReport fr = classify_fragment(cp.base);
    CHECK(fr.fragment == Fragment::linear);
    CHECK(fr.j <= 1);
    CHECK(fr.k <= 2);
}

TEST_CASE("symmetric mode yields a symmetric program") {
    CanonicalProgram cp = build_canonical(leq2(), 1, 2, CanonicalMode::symmetric);
    CHECK(classify_fragment(cp.base).fragment == Fragment::symmetric);
}

TEST_CASE("lazy acceptance agrees with the materialized program") {
    Structure b = leq2();
    CanonicalProgram cp = build_canonical(b, 1, 2, CanonicalMode::linear);
    std::mt19937 rng(11);
    for (int round = 0; round < 60; ++round) {
        Structure a = random_digraph(rng, 3, 0.4);
        bool lazy = canonical_accept(b, 1, 2, CanonicalMode::linear, a).accepted;
        bool full = evaluate(cp.base, a).accepted;
        REQUIRE(lazy == full);
    }
}

TEST_CASE("a long walk into a single arc is caught at width (1,2)") {
    Structure arc = parse_structure("domain: 0 1\nE/2: (0,1)\n");
    Structure p3 = parse_structure("domain: x y z\nE/2: (x,y) (y,z)\n");
    CHECK_FALSE(oracle::hom_exists(p3, arc)); // two consecutive arcs cannot land in one
    CanonicalAcceptance acc = canonical_accept(arc, 1, 2, CanonicalMode::linear, p3);
    CHECK(acc.accepted);
    REQUIRE(acc.witness.has_value());
    CHECK(validate_derivation(acc.witness_program.base, *acc.witness).ok);
}

TEST_CASE("loops in the template make every digraph map in") {
    Structure b = leq2();
    // the constant map is a homomorphism, so the canonical program must stay silent
    CHECK(oracle::hom_exists(cycle(5), b));
    CHECK_FALSE(canonical_accept(b, 1, 2, CanonicalMode::linear, cycle(5)).accepted);
    CHECK(oracle::hom_exists(cycle(4), b));
    CHECK_FALSE(canonical_accept(b, 1, 2, CanonicalMode::linear, cycle(4)).accepted);
}

TEST_CASE("acceptance is sound against the homomorphism oracle") {
    std::mt19937 rng(23);
    int accepted = 0;
    for (int round = 0; round < 120; ++round) {
        Structure b = random_digraph(rng, 2 + round % 2, 0.5);
        Structure a = random_digraph(rng, 3 + round % 2, 0.4);
        int j = round % 3 == 0 ? 2 : 1;
        int k = j + 1;
        CanonicalAcceptance acc = canonical_accept(b, j, k, CanonicalMode::linear, a);
        if (acc.accepted) {
            ++accepted;
            REQUIRE_FALSE(oracle::hom_exists(a, b));
            REQUIRE(acc.witness.has_value());
            CHECK(validate_derivation(acc.witness_program.base, *acc.witness).ok);
        }
    }
    CHECK(accepted > 0); // the sweep must exercise the accepting branch
}
