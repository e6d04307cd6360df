#include <string>

#include "cspb/errors.hpp"
#include "cspb/pathscape.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cspb;

namespace {

// three overlapping two-element bags carving the directed four-path
const char* kChainRep =
    "domain: a b c d\n"
    "E/2: (a,b) (b,c) (c,d)\n"
    "bags: [a b] [b c] [c d]\n";

Structure directed_cycle3() {
    return parse_structure("domain: 0 1 2\nE/2: (0,1) (1,2) (2,0)\n");
}

} // namespace

TEST_CASE("oriented path bookkeeping") {
    OrientedPath p("FFBFF");
    CHECK(p.levels == std::vector<int>{0, 1, 2, 1, 2, 3});
    CHECK(p.height == 3);
    CHECK(p.minimal);
    CHECK_FALSE(p.directed());
    CHECK(p.edge_level(2) == 1);

    CHECK(OrientedPath("FFF").directed());
    CHECK(OrientedPath("BBB").directed());
    CHECK_FALSE(OrientedPath("FBF").minimal); // bottom level hit twice
    CHECK_FALSE(OrientedPath("FFBF").minimal); // top level hit twice

    Structure s = OrientedPath("FF").to_structure();
    CHECK(s.domain() == std::vector<std::string>{"v0", "v1", "v2"});
    CHECK(s.relation("E").count({"v0", "v1"}));

    // names widen with the vertex count
    Structure wide = OrientedPath(std::string(10, 'F')).to_structure("w");
    CHECK(wide.has_element("w00"));
    CHECK(wide.has_element("w10"));
}

TEST_CASE("representation parse, print, validate") {
    Structure whole;
    PathRepresentation rep = parse_representation(kChainRep, &whole);
    CHECK(rep.bags.size() == 3);
    CHECK(rep.j == 1);
    CHECK(rep.k == 2);
    CHECK(validate_representation(rep, &whole).ok);
    CHECK(represented_structure(rep) == whole);

    PathRepresentation again = parse_representation(print_representation(rep));
    CHECK(again.bags.size() == rep.bags.size());
    CHECK(represented_structure(again) == whole);

    // an element whose bag occurrences have a gap is flagged
    PathRepresentation gap = parse_representation(
        "domain: a b c\nE/2: (a,b) (b,c)\nbags: [a b] [b c] [a c]\n");
    CHECK_FALSE(validate_representation(gap).ok);
}

TEST_CASE("zigzag unrolls a chain representation into the path itself") {
    PathRepresentation rep = parse_representation(kChainRep);
    OrientedPath p("FFBFF");
    ZigzagResult z = zigzag(rep, p);
    CHECK(z.bags.size() == 5); // one copy per edge
    CHECK(z.isos.size() == 5);

    Homomorphism proj = projection_hom(z, rep);
    CHECK(verify_homomorphism(proj));
    CHECK(isomorphic(proj.source, p.to_structure("z")));

    // straight unrolling reproduces the represented path
    ZigzagResult zs = zigzag(rep, OrientedPath("FFF"));
    Homomorphism sproj = projection_hom(zs, rep);
    CHECK(isomorphic(sproj.source, represented_structure(rep)));

    CHECK_THROWS_AS(zigzag(rep, OrientedPath("FBF")), InputError);
    CHECK_THROWS_AS(zigzag(rep, OrientedPath("FF")), InputError);
}

TEST_CASE("pathwidth decision finds and refuses correctly") {
    Structure p4 = parse_structure("domain: a b c d\nE/2: (a,b) (b,c) (c,d)\n");
    auto rep = decide_pathwidth(p4, 1, 2);
    REQUIRE(rep.has_value());
    CHECK(validate_representation(*rep, &p4).ok);
    CHECK(rep->j <= 1);
    CHECK(rep->k <= 2);

    // a directed triangle cannot be carved into two-element bags
    CHECK_FALSE(decide_pathwidth(directed_cycle3(), 1, 2).has_value());
    // but relaxing the width admits the whole structure as one bag
    CHECK(decide_pathwidth(directed_cycle3(), 2, 3).has_value());
}

TEST_CASE("filters gate words by run shape") {
    PathRepresentation rep = parse_representation(kChainRep);
    Filter f{{{1, 1}}, 1, 2};
    CHECK(validate_filter(f, rep).ok);
    CHECK(obeys_filter(OrientedPath("FFF"), f));
    CHECK_FALSE(obeys_filter(OrientedPath("FFBFF"), f)); // F B F run at level 1

    PathRepresentation grouped = regroup(rep, f);
    CHECK(validate_representation(grouped).ok);
    CHECK(represented_structure(grouped) == represented_structure(rep));

    Filter bad{{{2, 9}}, 1, 2};
    CHECK_FALSE(validate_filter(bad, rep).ok); // upper end beyond the bag list
    Filter crowded{{{0, 2}}, 1, 2};
    CHECK_FALSE(validate_filter(crowded, rep).ok); // covers four elements
}

TEST_CASE("n-window search picks the leftmost smallest window") {
    CHECK_FALSE(find_n_digraph(OrientedPath("FFFF")).has_value());

    auto w = find_n_digraph(OrientedPath("FFBFF"));
    REQUIRE(w.has_value());
    CHECK(w->start == 1);
    CHECK(w->s == 1);

    auto w2 = find_n_digraph(OrientedPath("FFFFBBFFFF"));
    REQUIRE(w2.has_value());
    CHECK(w2->start == 2);
    CHECK(w2->s == 2);

    CHECK_THROWS_AS(find_n_digraph(OrientedPath("FBF")), InputError);
}

TEST_CASE("window removal rebuilds homomorphisms through the operation") {
    PathRepresentation rep = parse_representation(kChainRep);
    OrientedPath p("FFBFF");
    Structure c3 = directed_cycle3();
    Operation m = Operation::from_function({"0", "1", "2"}, 3, [](const Tuple& t) {
        int x = std::stoi(t[0]), y = std::stoi(t[1]), z = std::stoi(t[2]);
        return std::to_string(((x - y + z) % 3 + 3) % 3);
    });
    REQUIRE(is_maltsev(m));
    REQUIRE(is_polymorphism(m, c3));

    // seed the unrolled map by composing the projection with a level coloring
    ZigzagResult z = zigzag(rep, p);
    Homomorphism proj = projection_hom(z, rep);
    std::map<std::string, std::string> color{{"a", "0"}, {"b", "1"}, {"c", "2"}, {"d", "0"}};
    Homomorphism start{proj.source, c3, {}};
    for (const auto& [v, orig] : proj.map) start.map[v] = color.at(orig);
    REQUIRE(verify_homomorphism(start));

    MaltsevStep step = maltsev_unzigzag(rep, p, start, m);
    CHECK(step.p_prime.word == "FFF");
    CHECK(verify_homomorphism(step.hom));

    Homomorphism full = maltsev_unzigzag_full(rep, p, start, m);
    CHECK(verify_homomorphism(full));
    CHECK(full.source == represented_structure(rep));
    CHECK(full.target == c3);
}
