#include <catch2/catch_amalgamated.hpp>

#include <tuple>
#include <vector>

#include "flatgeo/cylinder.hpp"
#include "flatgeo/origami.hpp"
#include "flatgeo/parse.hpp"

using namespace flatgeo;

namespace {

Surface unit_torus() { return square_tiled_from_permutations(1, {0}, {0}); }

Surface l_origami() { return square_tiled_from_permutations(3, {1, 0, 2}, {2, 1, 0}); }

// the same H(2) surface as l_origami, presented as one non-convex polygon
Surface l_polygon() {
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon L: (0,0) (1,0) (2,0) (2,1) (1,1) (1,2) (0,2) (0,1)\n"
        "glue L.e0 L.e5\n"
        "glue L.e1 L.e3\n"
        "glue L.e2 L.e7\n"
        "glue L.e4 L.e6\n");
}

Surface pillowcase() {
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: half-translation\n"
        "polygon P: (0,0) (1,0) (1,1) (0,1)\n"
        "glue P.e0 P.e0 flip\n"
        "glue P.e1 P.e1 flip\n"
        "glue P.e2 P.e2 flip\n"
        "glue P.e3 P.e3 flip\n");
}

Surface bare_torus() {  // no marks at all: every direction fills
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon T: (0,0) (1,0) (1,1) (0,1)\n"
        "glue T.e0 T.e2\n"
        "glue T.e1 T.e3\n");
}

Surface marked_torus_half() {  // extra free mark at the square's center
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon T: (0,0) (1,0) (1,1) (0,1)\n"
        "glue T.e0 T.e2\n"
        "glue T.e1 T.e3\n"
        "mark T (1/2,1/2) label=c\n");
}

}  // namespace

TEST_CASE("cylinders: marked square torus, axis and slope directions") {
    Surface t = unit_torus();
    Mesh m(t);

    auto horiz = cylinders_in_direction(m, Direction{1, 0});
    REQUIRE(horiz.periodic);
    REQUIRE(horiz.cylinders.size() == 1);
    const CylinderRec& c = horiz.cylinders[0];
    CHECK(c.t == 1);
    CHECK(c.h == 1);
    CHECK(c.c2 == 1);
    CHECK(c.simple());
    CHECK_FALSE(c.fills);
    CHECK(horiz.scs.size() == 2);  // one undirected connection, two orientations
    CHECK(horiz.circles.size() == 2);
    CHECK(horiz.reverse_sc[0] == 1);
    CHECK(horiz.scs[0].T == 1);
    CHECK(horiz.scs[0].from_mark >= 0);

    auto diag = cylinders_in_direction(m, Direction{1, 1});
    REQUIRE(diag.cylinders.size() == 1);
    CHECK(diag.cylinders[0].t == 1);
    CHECK(diag.cylinders[0].h == 1);
    CHECK(diag.cylinders[0].c2 == 2);

    auto steep = cylinders_in_direction(m, Direction{2, 1});
    REQUIRE(steep.cylinders.size() == 1);
    CHECK(steep.cylinders[0].t == 1);
    CHECK(steep.cylinders[0].h == 1);
    CHECK(steep.cylinders[0].c2 == 5);
    CHECK(steep.cylinders[0].simple());
}

TEST_CASE("cylinders: L-shaped origami splits horizontally into waists 2 and 1") {
    Surface l = l_origami();
    Mesh m(l);
    auto dec = cylinders_in_direction(m, Direction{1, 0});
    REQUIRE(dec.periodic);
    REQUIRE(dec.cylinders.size() == 2);

    // three unit connections, each recorded in both orientations
    CHECK(dec.scs.size() == 6);
    for (const ScRecord& sc : dec.scs) CHECK(sc.T == 1);

    std::vector<CylProfile> pr = profile(dec);
    REQUIRE(pr.size() == 2);
    CHECK(pr[0].t == 1);
    CHECK(pr[0].h == 1);
    CHECK(pr[0].bottom_T == std::vector<Q>{Q(1)});
    CHECK(pr[1].t == 2);
    CHECK(pr[1].h == 1);
    CHECK(pr[1].bottom_T == std::vector<Q>(2, Q(1)));

    // the waist-1 cylinder is bounded by one connection on each side
    int simple_count = 0;
    for (const CylinderRec& c : dec.cylinders) simple_count += c.simple();
    CHECK(simple_count == 1);

    auto ks = origami_cylinder_ks(l, Direction{1, 0});
    CHECK(ks == std::vector<long>{1, 2});
    CHECK(profile_from_ks(ks) == pr);
}

TEST_CASE("cylinders: tracing agrees with the first-return permutation engine") {
    // the same surface in two presentations, and a genus-1 strip
    Surface l = l_origami();
    Surface lp = l_polygon();
    Surface strip = square_tiled_from_permutations(4, {1, 2, 3, 0}, {0, 1, 2, 3});
    Mesh ml(l), mlp(lp), ms(strip);

    for (const Direction& d : directions_up_to(3)) {
        INFO("direction " << d.str());
        auto dl = cylinders_in_direction(ml, d);
        auto dlp = cylinders_in_direction(mlp, d);
        REQUIRE(dl.periodic);
        REQUIRE(dlp.periodic);
        CHECK(profile(dl) == profile_from_ks(origami_cylinder_ks(l, d)));
        CHECK(profile(dl) == profile(dlp));  // presentation independence

        auto ds = cylinders_in_direction(ms, d);
        CHECK(profile(ds) == profile_from_ks(origami_cylinder_ks(strip, d)));
    }
}

TEST_CASE("cylinders: tracing agrees with the shear-to-horizontal engine") {
    Surface lp = l_polygon();
    Mesh m(lp);
    for (const Direction& d : directions_up_to(3)) {
        INFO("direction " << d.str());
        auto direct = cylinders_in_direction(m, d);
        auto sheared = cylinders_sheared(lp, d);
        REQUIRE(direct.periodic);
        REQUIRE(sheared.periodic);
        CHECK(profile(direct) == profile(sheared));
    }

    Surface mt = marked_torus_half();
    Mesh mm(mt);
    for (const Direction& d : directions_up_to(3)) {
        INFO("direction " << d.str());
        CHECK(profile(cylinders_in_direction(mm, d)) == profile(cylinders_sheared(mt, d)));
    }
}

TEST_CASE("cylinders: pillowcase horizontal cylinder between pole circles") {
    Surface p = pillowcase();
    Mesh m(p);
    auto dec = cylinders_in_direction(m, Direction{1, 0});
    REQUIRE(dec.periodic);
    REQUIRE(dec.cylinders.size() == 1);
    const CylinderRec& c = dec.cylinders[0];
    CHECK(c.t == 2);
    CHECK(c.h == Q(1, 2));
    CHECK(c.c2 == 4);
    CHECK_FALSE(c.simple());
    CHECK(c.bottom.size() == 2);
    CHECK(c.top.size() == 2);

    // four directed connections pairing four pi-poles, each of length 1
    CHECK(dec.scs.size() == 4);
    for (const ScRecord& sc : dec.scs) {
        CHECK(sc.T == 1);
        CHECK(sc.from_cls >= 0);
        CHECK(m.info.classes[sc.from_cls].fold_midpoint);
    }
    REQUIRE(dec.circles.size() == 2);
    CHECK(dec.circles[0].size() == 2);
    CHECK(dec.circles[1].size() == 2);

    // diagonal: a single cylinder of circumference sqrt(2)
    auto diag = cylinders_in_direction(m, Direction{1, 1});
    REQUIRE(diag.cylinders.size() == 1);
    CHECK(diag.cylinders[0].t == 1);
    CHECK(diag.cylinders[0].h == 1);
    CHECK(diag.cylinders[0].c2 == 2);
    CHECK(diag.scs.size() == 4);
    for (const ScRecord& sc : diag.scs) CHECK(sc.T == Q(1, 2));

    // the shear engine sees the same geometry in every low direction
    for (const Direction& d : directions_up_to(4)) {
        INFO("direction " << d.str());
        CHECK(profile(cylinders_in_direction(m, d)) == profile(cylinders_sheared(p, d)));
    }
}

TEST_CASE("cylinders: a free mark blocks the flow like an order-0 cone") {
    Surface mt = marked_torus_half();
    Mesh m(mt);
    auto dec = cylinders_in_direction(m, Direction{1, 0});
    REQUIRE(dec.periodic);
    // the polygon corner is a plain regular point here; only the center mark
    // interrupts the flow, pinching the torus into one closed-up cylinder
    REQUIRE(dec.cylinders.size() == 1);
    CHECK(dec.cylinders[0].t == 1);
    CHECK(dec.cylinders[0].h == 1);
    CHECK(dec.cylinders[0].simple());
    CHECK_FALSE(dec.cylinders[0].fills);
    CHECK(dec.scs.size() == 2);  // the mark-to-mark loop, both orientations
    CHECK(dec.scs[0].from_mark >= 0);
    CHECK(dec.scs[0].to_mark >= 0);
    CHECK(dec.scs[0].T == 1);
    CHECK(dec.circles.size() == 2);

    // with marks released, the torus is one plain cylinder again
    auto loose = cylinders_in_direction(m, Direction{1, 0}, CylinderOpts{false, Q(-1)});
    REQUIRE(loose.cylinders.size() == 1);
    CHECK(loose.cylinders[0].fills);
    CHECK(loose.cylinders[0].t == 1);
    CHECK(loose.cylinders[0].h == 1);
}

TEST_CASE("cylinders: unmarked torus fills in every direction") {
    Surface t = bare_torus();
    Mesh m(t);
    const std::vector<std::tuple<long, long, long>> cases = {
        {1, 0, 1}, {0, 1, 1}, {1, 1, 2}, {2, 1, 5}, {-3, 2, 13}};
    for (auto [p, q, c2] : cases) {
        Direction d{p, q};
        auto dec = cylinders_in_direction(m, d);
        REQUIRE(dec.periodic);
        REQUIRE(dec.cylinders.size() == 1);
        CHECK(dec.cylinders[0].fills);
        CHECK(dec.cylinders[0].c2 == c2);
        CHECK(dec.cylinders[0].t * dec.cylinders[0].h == dec.area);
        CHECK(dec.scs.empty());
        CHECK_FALSE(dec.cylinders[0].simple());
    }

    auto dec = cylinders_in_direction(m, Direction{2, 1});
    auto loc = locate_in_cylinders(m, dec, SurfacePoint{0, {Q(1, 2), Q(1, 2)}});
    CHECK_FALSE(loc.on_boundary);
    CHECK(loc.cyl == 0);
    CHECK(loc.offset == Q(1, 2));  // phi = -x + 2y above the corner leaf
}

TEST_CASE("cylinders: point location inside and on the boundary") {
    Surface t = unit_torus();
    Mesh m(t);
    auto dec = cylinders_in_direction(m, Direction{1, 0});
    REQUIRE(dec.cylinders.size() == 1);

    auto inside = locate_in_cylinders(m, dec, SurfacePoint{0, {Q(1, 2), Q(1, 4)}});
    CHECK_FALSE(inside.on_boundary);
    CHECK(inside.cyl == 0);
    CHECK(inside.offset == Q(1, 4));

    // directly above the marked lattice point: the perpendicular probe is
    // blocked by the mark on both sides, forcing a slanted probe
    auto tricky = locate_in_cylinders(m, dec, SurfacePoint{0, {Q(0), Q(1, 2)}});
    CHECK_FALSE(tricky.on_boundary);
    CHECK(tricky.cyl == 0);
    CHECK(tricky.offset == Q(1, 2));

    auto on_sc = locate_in_cylinders(m, dec, SurfacePoint{0, {Q(1, 4), Q(0)}});
    CHECK(on_sc.on_boundary);
    CHECK(on_sc.sc >= 0);

    auto at_mark = locate_in_cylinders(m, dec, SurfacePoint{0, {Q(0), Q(0)}});
    CHECK(at_mark.on_boundary);

    Surface l = l_origami();
    Mesh ml(l);
    auto dl = cylinders_in_direction(ml, Direction{1, 0});
    // square 2 sits alone on top of square 0: its interior is the waist-1 cylinder
    auto up = locate_in_cylinders(ml, dl, SurfacePoint{2, {Q(1, 3), Q(3, 4)}});
    auto low = locate_in_cylinders(ml, dl, SurfacePoint{1, {Q(1, 3), Q(3, 4)}});
    CHECK_FALSE(up.on_boundary);
    CHECK_FALSE(low.on_boundary);
    CHECK(up.cyl != low.cyl);
    CHECK(up.offset == Q(3, 4));
    CHECK(low.offset == Q(3, 4));
    CHECK(dl.cylinders[up.cyl].t == 1);
    CHECK(dl.cylinders[low.cyl].t == 2);
}

TEST_CASE("cylinders: a caller-set budget reports an honest witness") {
    Surface l = l_origami();
    Mesh m(l);
    auto dec = cylinders_in_direction(m, Direction{5, 3}, CylinderOpts{true, Q(1, 4)});
    CHECK_FALSE(dec.periodic);
    CHECK(dec.budget_len2 == Q(1, 4));
    CHECK(!dec.witness.empty());
    CHECK(dec.cylinders.empty());
}

TEST_CASE("cylinders: deterministic output across repeated runs") {
    Surface l = l_origami();
    Mesh m(l);
    auto a = cylinders_in_direction(m, Direction{1, 2});
    auto b = cylinders_in_direction(m, Direction{1, 2});
    REQUIRE(a.scs.size() == b.scs.size());
    for (size_t i = 0; i < a.scs.size(); ++i) {
        CHECK(a.scs[i].from == b.scs[i].from);
        CHECK(a.scs[i].to == b.scs[i].to);
        CHECK(a.scs[i].T == b.scs[i].T);
        CHECK(a.scs[i].mid == b.scs[i].mid);
    }
    CHECK(a.circles == b.circles);
    CHECK(a.circle_cyl == b.circle_cyl);
    REQUIRE(a.cylinders.size() == b.cylinders.size());
    for (size_t i = 0; i < a.cylinders.size(); ++i) {
        CHECK(a.cylinders[i].t == b.cylinders[i].t);
        CHECK(a.cylinders[i].h == b.cylinders[i].h);
        CHECK(a.cylinders[i].bottom == b.cylinders[i].bottom);
        CHECK(a.cylinders[i].top == b.cylinders[i].top);
    }
}

TEST_CASE("cylinders: higher-slope sweep keeps all internal identities") {
    // the engine asserts the area identity and circle-length equality on every
    // run; sweeping many directions exercises fan walks, pole double-backs and
    // probe slants across both kinds of surfaces
    Surface l = l_origami();
    Surface p = pillowcase();
    Mesh ml(l), mp(p);
    for (const Direction& d : directions_up_to(4)) {
        INFO("direction " << d.str());
        auto a = cylinders_in_direction(ml, d);
        REQUIRE(a.periodic);
        CHECK(profile(a) == profile_from_ks(origami_cylinder_ks(l, d)));
        auto b = cylinders_in_direction(mp, d);
        REQUIRE(b.periodic);
        Q total = 0;
        for (const CylinderRec& c : b.cylinders) total += c.t * c.h;
        CHECK(total == b.area);
    }
}
