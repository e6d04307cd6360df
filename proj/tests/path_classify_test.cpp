#include <string>

#include "cspb/errors.hpp"
#include "cspb/path_classify.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cspb;

TEST_CASE("shape classification table") {
    auto shape = [](const char* w) { return classify_path_shape(OrientedPath(w)); };

    CHECK(shape("FFF").kind == PathShape::Kind::directed);
    CHECK_FALSE(shape("FFF").mirrored);
    CHECK(shape("BBB").kind == PathShape::Kind::directed);
    CHECK(shape("BBB").mirrored);

    PathShape w1 = shape("FFBFF");
    CHECK(w1.kind == PathShape::Kind::wave);
    CHECK(w1.wave_r == 1);
    CHECK(w1.wave_ell == 1);

    PathShape w2 = shape("FFFBBFFF");
    CHECK(w2.kind == PathShape::Kind::wave);
    CHECK(w2.wave_r == 1);
    CHECK(w2.wave_ell == 2);

    PathShape w3 = shape("FFBFBFF");
    CHECK(w3.kind == PathShape::Kind::wave);
    CHECK(w3.wave_r == 2);
    CHECK(w3.wave_ell == 1);

    PathShape m = shape("BBFBB");
    CHECK(m.kind == PathShape::Kind::wave);
    CHECK(m.mirrored);
    CHECK(m.wave_ell == 1);

    PathShape st = shape("FFFBFFF");
    CHECK(st.kind == PathShape::Kind::staircase);
    REQUIRE(st.segments.size() == 3);
    CHECK_FALSE(st.segments[0].is_wave);
    CHECK(st.segments[0].len == 3);
    CHECK(st.segments[1].is_wave);
    CHECK(st.segments[1].ell == 1);
    CHECK(st.segments[1].r == 0);

    CHECK(shape("FFFFFBFFFFF").kind == PathShape::Kind::staircase);
    CHECK(shape("FFFFBBFBBFFFF").kind == PathShape::Kind::other);
    CHECK(shape("FFBF").kind == PathShape::Kind::other);
}

TEST_CASE("decompositions rebuild their word") {
    for (const char* w : {"F", "FFFF", "BB", "FFBFF", "FFFBBFFF", "FFBFBFF", "BBFBB", "FFFBFFF",
                          "FFFFFBFFFFF", "FFFBFFFFBFFFF"}) {
        PathShape s = classify_path_shape(OrientedPath(w));
        if (s.kind != PathShape::Kind::other) CHECK(s.resynthesize() == w);
    }
    CHECK(classify_path_shape(OrientedPath("FFBF")).resynthesize().empty());
}

TEST_CASE("mirroring is an involution on words") {
    for (const char* w : {"F", "FFBFF", "FFFFBBFBBFFFF", "BFBF"})
        CHECK(mirror_word(mirror_word(w)) == w);
    CHECK(mirror_word("FFB") == "FBB");
}

TEST_CASE("common path of straight and wiggly is the wiggle") {
    OrientedPath straight("FFF");
    OrientedPath wiggle("FFBFF");
    auto q = common_path(straight, wiggle, 40);
    REQUIRE(q.has_value());
    CHECK(q->word == "FFBFF");

    auto same = common_path(straight, straight, 40);
    REQUIRE(same.has_value());
    CHECK(same->word == "FFF");

    CHECK_THROWS_AS(common_path(straight, OrientedPath("FFFF"), 40), InputError);
    CHECK_THROWS_AS(common_path(OrientedPath("FBF"), straight, 40), InputError);
}

TEST_CASE("level-band witness on the benchmark core path") {
    OrientedPath b("FFFFBBFBBFFFF");
    auto w = nl_witness_search(b);
    REQUIRE(w.has_value());
    CHECK(w->band_start == 1);
    CHECK(w->split_start == 4);
    CHECK(w->split_end == 9);
    CHECK(w->band_end == 12);
    CHECK_FALSE(w->flipped);
    CHECK(w->h == 3);
    CHECK(w->q.word == "FFF");
    CHECK(w->p2_ruled_out);
    CHECK(witness_frame(b, *w).word == b.word);
}

TEST_CASE("witness search flips to the mirror when needed") {
    OrientedPath b("BBBBFFBFFBBBB");
    auto w = nl_witness_search(b);
    REQUIRE(w.has_value());
    CHECK(w->flipped);
    CHECK(w->band_start == 1);
    CHECK(w->split_start == 4);
    CHECK(w->split_end == 9);
    CHECK(w->band_end == 12);
    CHECK(witness_frame(b, *w).word == "FFFFBBFBBFFFF");
}

TEST_CASE("waves and lone-dip staircases carry no witness") {
    CHECK_FALSE(nl_witness_search(OrientedPath("FFBFF")).has_value());
    CHECK_FALSE(nl_witness_search(OrientedPath("FFFBBFFF")).has_value());
    CHECK_FALSE(nl_witness_search(OrientedPath("FFFFFBFFFFF")).has_value());
}

TEST_CASE("order gadget realizes exactly the three order pairs") {
    OrientedPath b("FFFFBBFBBFFFF");
    auto w = nl_witness_search(b);
    REQUIRE(w.has_value());
    LeqGadget g = build_leq_gadget(b, *w);
    CHECK(g.verified);
    CHECK(g.zero_vertex == "v01");
    CHECK(g.one_vertex == "v09");
    std::set<std::pair<std::string, std::string>> expect{
        {"v01", "v01"}, {"v01", "v09"}, {"v09", "v09"}};
    CHECK(g.projection == expect);
    CHECK(g.g.has_element(g.x));
    CHECK(g.g.has_element(g.y));
}

TEST_CASE("wave obstructions certify non-mapping") {
    OrientedPath q("FFBFF");
    WaveObstructions obs = wave_obstructions(q, 8);
    CHECK(obs.h == 1);
    CHECK_FALSE(obs.paths.empty());
    for (const OrientedPath& o : obs.paths) {
        CHECK(o.height == 3);
        CHECK(o.minimal);
        CHECK_FALSE(homomorphic(o.to_structure(), q.to_structure()));
    }
    CHECK(obstruction_set_covers(obs, OrientedPath("FFF")));       // sinks into any height-3 word
    CHECK(obstruction_set_covers(obs, OrientedPath("FFFFF")));     // over the height bound
    CHECK_FALSE(obstruction_set_covers(obs, OrientedPath("FF"))); // genuinely maps into q

    CHECK_THROWS_AS(wave_obstructions(OrientedPath("BBFBB"), 8), InputError);
    CHECK_THROWS_AS(wave_obstructions(OrientedPath("FFFFBBFBBFFFF"), 8), InputError);
}

TEST_CASE("rigidity of core paths") {
    CHECK(is_rigid_path(OrientedPath("FFF")));
    CHECK(is_rigid_path(OrientedPath("FFBFF")));
    CHECK(is_rigid_path(OrientedPath("FFFFBBFBBFFFF")));
    CHECK_THROWS_AS(is_rigid_path(OrientedPath("FBF")), InputError);
}
