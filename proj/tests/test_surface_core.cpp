#include <catch2/catch_amalgamated.hpp>

#include "flatgeo/parse.hpp"

using namespace flatgeo;

namespace {

Surface l_origami() { return square_tiled_from_permutations(3, {1, 0, 2}, {2, 1, 0}); }

Surface unit_torus_flatsurf(bool marked = false) {
    std::string text =
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon T: (0,0) (1,0) (1,1) (0,1)\n"
        "glue T.e0 T.e2\n"
        "glue T.e1 T.e3\n";
    if (marked) text += "mark T (0,0) label=o\n";
    return parse_surface(text);
}

}  // namespace

TEST_CASE("rational parsing and printing") {
    CHECK(q_str(parse_q("2/4")) == "1/2");
    CHECK(q_str(parse_q("-6/4")) == "-3/2");
    CHECK(q_str(parse_q("7")) == "7");
    CHECK_THROWS_AS(parse_q("1/0"), Error);
    CHECK_THROWS_AS(parse_q("a"), Error);
    CHECK_THROWS_AS(parse_q(""), Error);
}

TEST_CASE("direction normalization and sweep order") {
    CHECK(Direction(2, 4).str() == "1,2");
    CHECK(Direction(-1, -2).str() == "1,2");
    CHECK(Direction(-3, 0).str() == "1,0");
    CHECK(Direction(0, -5).str() == "0,1");
    CHECK_THROWS_AS(Direction(0, 0), Error);

    auto d1 = directions_up_to(1);
    REQUIRE(d1.size() == 4);
    CHECK(d1[0].str() == "-1,1");
    CHECK(d1[1].str() == "0,1");
    CHECK(d1[2].str() == "1,0");
    CHECK(d1[3].str() == "1,1");
    // heights weakly increase and entries are unique
    auto d10 = directions_up_to(10);
    for (size_t i = 1; i < d10.size(); ++i) {
        CHECK(cmp(d10[i - 1].height(), d10[i].height()) <= 0);
        CHECK(d10[i - 1] != d10[i]);
    }
    // Euler phi count: sum over h<=B of #primitive vectors with max=h, mod signs
    CHECK(d10.size() == 128);
}

TEST_CASE("wedge predicate") {
    // quarter wedge
    CHECK(in_wedge_strict({1, 0}, {0, 1}, {1, 1}));
    CHECK_FALSE(in_wedge_strict({1, 0}, {0, 1}, {1, -1}));
    CHECK_FALSE(in_wedge_strict({1, 0}, {0, 1}, {1, 0}));
    // straight wedge
    CHECK(in_wedge_strict({1, 0}, {-1, 0}, {0, 1}));
    CHECK_FALSE(in_wedge_strict({1, 0}, {-1, 0}, {0, -1}));
    // reflex wedge
    CHECK(in_wedge_strict({1, 0}, {0, -1}, {0, 1}));
    CHECK(in_wedge_strict({1, 0}, {0, -1}, {-1, -1}));
    CHECK_FALSE(in_wedge_strict({1, 0}, {0, -1}, {1, -1}));
}

TEST_CASE("unit torus basics") {
    Surface t = unit_torus_flatsurf();
    ValidationReport r = validate(t);
    CHECK(r.ok());
    CHECK(area(t) == 1);
    SurfaceInfo info(t);
    REQUIRE(info.classes.size() == 1);
    CHECK(info.classes[0].angle_pi == 2);
    CHECK(info.genus == 1);
    CHECK(info.stratum().str() == "H()");  // no marks, no zeros

    Surface tm = unit_torus_flatsurf(true);
    SurfaceInfo im(tm);
    CHECK(im.stratum().str() == "H(0)");
    CHECK(im.stratum().genus == 1);
}

TEST_CASE("origami torus has auto mark and stratum H(0)") {
    Surface t = square_tiled_from_permutations(1, {0}, {0});
    REQUIRE(t.marks.size() == 1);
    SurfaceInfo info(t);
    CHECK(info.stratum().str() == "H(0)");
    CHECK(area(t) == 1);

    Surface t2 = parse_surface("format: origami/1\nn: 1\nh: (1)\nv: (1)\n");
    CHECK(serialize_origami(t2) == serialize_origami(t));
}

TEST_CASE("two-square torus is H(0,0)") {
    Surface t = square_tiled_from_permutations(2, {1, 0}, {0, 1});
    SurfaceInfo info(t);
    CHECK(info.genus == 1);
    CHECK(info.stratum().str() == "H(0,0)");
    CHECK(area(t) == 2);
    CHECK(t.marks.size() == 2);
}

TEST_CASE("L origami census") {
    Surface L = l_origami();
    ValidationReport r = validate(L);
    CHECK(r.ok());
    CHECK(area(L) == 3);
    SurfaceInfo info(L);
    REQUIRE(info.classes.size() == 1);
    CHECK(info.classes[0].angle_pi == 6);  // 6 pi = one order-2 zero
    CHECK(info.classes[0].corners.size() == 12);
    CHECK(info.genus == 2);
    CHECK(info.stratum().str() == "H(2)");
    CHECK(L.marks.empty());  // the only class is singular: nothing to auto-mark
    CHECK(info.total_angle_pi == 6);
}

TEST_CASE("L origami from file matches constructor") {
    Surface a = parse_surface("format: origami/1\nn: 3\nh: (1 2)(3)\nv: (1 3)(2)\n");
    Surface b = l_origami();
    CHECK(serialize_origami(a) == serialize_origami(b));
    CHECK(serialize_origami(a) == "format: origami/1\nn: 3\nh: (1 2)\nv: (1 3)\n");
}

TEST_CASE("pillowcase: folds give four poles on a sphere") {
    std::string text =
        "format: flatsurf/1\n"
        "kind: half-translation\n"
        "polygon P: (0,0) (1,0) (1,1) (0,1)\n"
        "glue P.e0 P.e0 flip\n"
        "glue P.e1 P.e1 flip\n"
        "glue P.e2 P.e2 flip\n"
        "glue P.e3 P.e3 flip\n";
    Surface p = parse_surface(text);
    SurfaceInfo info(p);
    CHECK(info.genus == 0);
    long poles = 0, regular = 0;
    for (const auto& vc : info.classes) {
        if (vc.angle_pi == 1) ++poles;
        if (vc.angle_pi == 2) ++regular;
    }
    CHECK(poles == 4);
    CHECK(regular == 1);
    CHECK(info.stratum().str() == "Q(-1,-1,-1,-1)");
}

TEST_CASE("empty stratum rejection") {
    // a flat torus presented with flip gluings claims Q(): rejected
    std::string text =
        "format: flatsurf/1\n"
        "kind: half-translation\n"
        "polygon A: (0,0) (1,0) (1,1) (0,1)\n"
        "polygon B: (0,0) (1,0) (1,1) (0,1)\n"
        "glue A.e0 B.e0 flip\n"
        "glue A.e1 B.e1 flip\n"
        "glue A.e2 B.e2 flip\n"
        "glue A.e3 B.e3 flip\n";
    CHECK_THROWS_AS(parse_surface(text), Error);
    try {
        parse_surface(text);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("empty") != std::string::npos);
    }
}

TEST_CASE("validation failures carry witnesses") {
    Surface s;
    s.kind = Kind::translation;
    Polygon P;
    P.id = "A";
    P.v = {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
    s.polys.push_back(P);
    s.gluings.push_back({{0, 0}, {0, 2}, false});
    // edges 1 and 3 left unglued
    ValidationReport r = validate(s);
    CHECK_FALSE(r.ok());
    bool found = false;
    for (const auto& c : r.checks)
        if (c.name == "edge-coverage" && !c.pass && c.witness.find("A.e1") != std::string::npos)
            found = true;
    CHECK(found);

    // flip gluing on translation kind
    s.gluings.push_back({{0, 1}, {0, 1}, true});
    s.gluings.push_back({{0, 3}, {0, 3}, true});
    ValidationReport r2 = validate(s);
    CHECK_FALSE(r2.ok());
    bool kind_fail = false;
    for (const auto& c : r2.checks)
        if (c.name == "gluing-consistency" && !c.pass) kind_fail = true;
    CHECK(kind_fail);
}

TEST_CASE("apply_matrix scales area and survives inverse round trip") {
    Surface L = l_origami();
    Mat2 m{2, 0, 0, 1};
    Surface L2 = apply_matrix(L, m);
    CHECK(area(L2) == 6);
    CHECK(validate(L2).ok());
    Surface L3 = apply_matrix(L2, m.inverse());
    CHECK(area(L3) == 3);
    CHECK(serialize_flatsurf(L3) == serialize_flatsurf(apply_matrix(L, Mat2{1, 0, 0, 1})));

    // negative determinant keeps polygons ccw and the surface valid
    Surface Lr = apply_matrix(L, Mat2{-1, 0, 0, 1});
    CHECK(validate(Lr).ok());
    CHECK(area(Lr) == 3);
}

TEST_CASE("parse/serialize round trip is exact") {
    Surface L = l_origami();
    std::string f = serialize_flatsurf(L);
    Surface L2 = parse_surface(f);
    CHECK(serialize_flatsurf(L2) == f);

    std::string text =
        "format: flatsurf/1\n"
        "kind: translation\n"
        "# a comment\n"
        "polygon A: (0,0) (3/2,0) (3/2,5/7) (0,5/7)\n"
        "glue A.e0 A.e2\n"
        "glue A.e1 A.e3\n"
        "mark A (1/2,1/2) label=w\n";
    Surface s = parse_surface(text);
    std::string f2 = serialize_flatsurf(s);
    Surface s2 = parse_surface(f2);
    CHECK(serialize_flatsurf(s2) == f2);
    CHECK(s2.marks.size() == 1);
    CHECK(s2.marks[0].label == "w");
}

TEST_CASE("parse errors name the line") {
    try {
        parse_surface("format: flatsurf/1\nkind: translation\nbogus statement\n");
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_surface("format: origami/1\nn: 2\nh: (1 2)\nv: (3)\n"), Error);
    // non-transitive pair: two disjoint tori
    CHECK_THROWS_AS(parse_surface("format: origami/1\nn: 2\nh: (1)(2)\nv: (1)(2)\n"), Error);
}

TEST_CASE("canonical points resolve glued boundaries") {
    Surface t = unit_torus_flatsurf();
    SurfaceInfo info(t);
    // all four corners are one class
    SurfacePoint c = info.canonical_point({0, Vec2{1, 1}});
    CHECK(c == info.canonical_point({0, Vec2{0, 0}}));
    // edge midpoints: bottom matches top
    SurfacePoint e1 = info.canonical_point({0, Vec2{Q(1, 2), 0}});
    SurfacePoint e2 = info.canonical_point({0, Vec2{Q(1, 2), 1}});
    CHECK(e1 == e2);
    // interior point is its own representative
    SurfacePoint i1 = info.canonical_point({0, Vec2{Q(1, 3), Q(1, 5)}});
    CHECK(i1.pos == (Vec2{Q(1, 3), Q(1, 5)}));
}
