#include <algorithm>
#include <random>
#include <set>

#include "cspb/errors.hpp"
#include "cspb/hom_search.hpp"
#include "cspb/structure.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cspb;

namespace {

Structure random_digraph(std::mt19937& rng, int n, double p) {
    std::vector<std::string> dom;
    for (int i = 0; i < n; ++i) dom.push_back(std::string(1, static_cast<char>('a' + i)));
    std::set<Tuple> edges;
    std::bernoulli_distribution coin(p);
    for (const auto& u : dom)
        for (const auto& v : dom)
            if (coin(rng)) edges.insert({u, v});
    return Structure(Vocabulary{{{"E", 2}}}, dom, {{"E", edges}});
}

} // namespace

TEST_CASE("hom search agrees with oracle on random pairs") {
    std::mt19937 rng(20240816);
    for (int round = 0; round < 200; ++round) {
        Structure a = random_digraph(rng, 3, 0.4);
        Structure b = random_digraph(rng, 3, 0.5);
        auto expected = oracle::all_homs(a, b);
        auto got = all_homomorphisms(a, b);
        REQUIRE(got.size() == expected.size());
        std::set<std::map<std::string, std::string>> lhs(got.begin(), got.end());
        std::set<std::map<std::string, std::string>> rhs(expected.begin(), expected.end());
        CHECK(lhs == rhs);
        CHECK(find_homomorphism(a, b).has_value() == !expected.empty());
    }
}

TEST_CASE("find_homomorphism_extending honors pins") {
    Structure path = parse_structure("domain: a b\nE/2: (a,b)\n");
    Structure two = parse_structure("domain: x y z\nE/2: (x,y) (y,z)\n");
    auto h = find_homomorphism_extending(path, two, {{"a", "y"}});
    REQUIRE(h.has_value());
    CHECK(h->map.at("a") == "y");
    CHECK(h->map.at("b") == "z");
    CHECK_FALSE(find_homomorphism_extending(path, two, {{"a", "z"}}).has_value());
}

TEST_CASE("core of an even cycle is a single arc pair") {
    // symmetric 4-cycle retracts onto a digon
    Structure c4 = parse_structure(
        "domain: a b c d\nE/2: (a,b) (b,a) (b,c) (c,b) (c,d) (d,c) (d,a) (a,d)\n");
    CoreResult r = core_of(c4);
    CHECK(r.core.domain().size() == 2);
    CHECK(verify_homomorphism(c4, r.core, r.retraction.map));
    for (const auto& e : r.core.domain()) CHECK(r.retraction.map.at(e) == e);
}

TEST_CASE("core of a rigid structure is itself") {
    Structure tri = parse_structure("domain: a b c\nE/2: (a,b) (b,c) (c,a)\n");
    CoreResult r = core_of(tri);
    CHECK(r.core.domain().size() == 3);
}

TEST_CASE("isomorphism detects relabelings only") {
    Structure p1 = parse_structure("domain: a b c\nE/2: (a,b) (b,c)\n");
    Structure p2 = parse_structure("domain: x y z\nE/2: (z,y) (y,x)\n");
    CHECK(isomorphic(p1, p2));
    Structure q = parse_structure("domain: x y z\nE/2: (x,y) (x,z)\n");
    CHECK_FALSE(isomorphic(p1, q));
}

TEST_CASE("operations and polymorphisms") {
    // boolean AND preserves the order template {(0,0),(0,1),(1,1)}
    Operation andop = Operation::from_function({"0", "1"}, 2, [](const Tuple& t) {
        return (t[0] == "1" && t[1] == "1") ? "1" : "0";
    });
    Structure leq = parse_structure("domain: 0 1\nE/2: (0,0) (0,1) (1,1)\n");
    CHECK(is_polymorphism(andop, leq));

    Operation proj1 = Operation::from_function({"0", "1"}, 3, [](const Tuple& t) { return t[0]; });
    CHECK(is_polymorphism(proj1, leq));
    CHECK_FALSE(is_maltsev(proj1));

    // x - y + z mod 3 is the affine Maltsev operation
    Operation affine = Operation::from_function({"0", "1", "2"}, 3, [](const Tuple& t) {
        int x = t[0][0] - '0', y = t[1][0] - '0', z = t[2][0] - '0';
        return std::string(1, static_cast<char>('0' + ((x - y + z) % 3 + 3) % 3));
    });
    CHECK(is_maltsev(affine));
    Structure z3 = parse_structure("domain: 0 1 2\nE/2: (0,1) (1,2) (2,0)\n");
    CHECK(is_polymorphism(affine, z3));
}

TEST_CASE("search budget raises instead of lying") {
    Structure a = parse_structure("domain: a b c d e f\nE/2:\n");
    Structure b = parse_structure("domain: u v w x y z\nE/2:\n");
    SearchLimits tiny;
    tiny.max_nodes = 2;
    CHECK_THROWS_AS(all_homomorphisms(a, b, tiny), ResourceError);
}
