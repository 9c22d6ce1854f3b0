#include <catch2/catch_amalgamated.hpp>

#include "flatgeo/involution.hpp"
#include "flatgeo/origami.hpp"

#include <numeric>

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

Surface two_square_torus() { return square_tiled_from_permutations(2, {1, 0}, {0, 1}); }

// torus glued from two triangles; neither triangle is centrally symmetric,
// but a point reflection exchanges them
Surface two_triangle_torus() {
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon A: (0,0) (1,0) (1,1)\n"
        "polygon B: (0,0) (1,1) (0,1)\n"
        "glue A.e0 B.e1\n"
        "glue A.e1 B.e2\n"
        "glue A.e2 B.e0\n");
}

// unmarked torus whose single hexagonal polygon is not centrally symmetric:
// edge vectors a,b,-a,c,-b,-c with c != a+b, so no point reflection maps the
// hexagon to itself and the search must fall back to the lattice form
Surface hexagon_torus() {
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon h: (0,0) (1,0) (1,1) (0,1) (-1,2) (-1,1)\n"
        "glue h.e0 h.e2\n"
        "glue h.e1 h.e4\n"
        "glue h.e3 h.e5\n");
}

Surface marked_torus(const std::string& mark_lines) {
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon c0: (0,0) (1,0) (1,1) (0,1)\n"
        "glue c0.e0 c0.e2\n"
        "glue c0.e1 c0.e3\n" +
        mark_lines);
}

Surface pillowcase() {
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: half-translation\n"
        "polygon p: (0,0) (1,0) (1,1) (0,1)\n"
        "glue p.e0 p.e0 flip\n"
        "glue p.e1 p.e1 flip\n"
        "glue p.e2 p.e2 flip\n"
        "glue p.e3 p.e3 flip\n");
}

Surface h4_hyperelliptic() {
    return square_tiled_from_permutations(5, {0, 1, 3, 4, 2}, {2, 3, 0, 4, 1});
}

// carries a derivative -I self-map, but one with only four fixed points
// (quotient of genus one), so it is not hyperelliptic
Surface h4_symmetric_over_torus() {
    return square_tiled_from_permutations(5, {0, 1, 3, 4, 2}, {2, 3, 0, 1, 4});
}

Surface h4_odd() {
    return square_tiled_from_permutations(5, {0, 2, 1, 4, 3}, {1, 2, 3, 0, 4});
}

Surface h11_origami() { return square_tiled_from_permutations(4, {0, 1, 3, 2}, {2, 3, 0, 1}); }

// Independent oracle for square-tiled surfaces. Any derivative -I self-map
// must send unit squares to unit squares (each maps by z -> (1,1) - z) because
// some distinguished point sits at a lattice vertex, so involutions correspond
// exactly to square permutations sig with sig^2 = id that conjugate both
// gluing permutations to their inverses. Fixed points are counted from first
// principles: one square center per sig-fixed square, one edge midpoint per
// gluing whose square agrees with its image (sig(i) = h(i) or v(i)), and one
// per vertex class mapped to itself. Marked classes need no separate check:
// every regular lattice class is marked, and angles are preserved.
struct AlgInvolution {
    std::vector<int> sig;
    long fixed = 0;
};

std::vector<AlgInvolution> algebraic_involutions(const Surface& s) {
    REQUIRE(s.origami);
    long n = s.origami->n;
    const std::vector<int>&h = s.origami->h, &v = s.origami->v;
    std::vector<int> hinv(n), vinv(n);
    for (int i = 0; i < n; ++i) hinv[h[i]] = i;
    for (int i = 0; i < n; ++i) vinv[v[i]] = i;
    SurfaceInfo info(s);
    std::vector<AlgInvolution> out;
    std::vector<int> sig(n);
    std::iota(sig.begin(), sig.end(), 0);
    do {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i)
            ok = sig[sig[i]] == i && sig[h[sig[i]]] == hinv[i] && sig[v[sig[i]]] == vinv[i];
        if (!ok) continue;
        long fixed = 0;
        for (int i = 0; i < n; ++i) fixed += sig[i] == i;
        for (int i = 0; i < n; ++i) fixed += sig[i] == h[i];
        for (int i = 0; i < n; ++i) fixed += sig[i] == v[i];
        for (int k = 0; k < (int)info.classes.size(); ++k) {
            Corner c0 = info.classes[k].corners[0];
            if (info.corner_cls[sig[c0.poly]][(c0.vtx + 2) % 4] == k) ++fixed;
        }
        out.push_back({sig, fixed});
    } while (std::next_permutation(sig.begin(), sig.end()));
    return out;
}

struct Census {
    long cone = 0, marked = 0, regular = 0;
};

Census census(const std::vector<WeierstrassPoint>& pts) {
    Census c;
    for (const auto& p : pts) {
        if (p.kind == WeierstrassPoint::Kind::cone) ++c.cone;
        else if (p.kind == WeierstrassPoint::Kind::marked) ++c.marked;
        else ++c.regular;
    }
    return c;
}

void expect_point(const WeierstrassPoint& p, int poly, const Q& x, const Q& y,
                  WeierstrassPoint::Kind kind) {
    CAPTURE(p.at.poly, q_str(p.at.pos.x), q_str(p.at.pos.y));
    REQUIRE(p.at.poly == poly);
    REQUIRE(p.at.pos == Vec2{x, y});
    REQUIRE(p.kind == kind);
}

}  // namespace

TEST_CASE("involution: unit square torus") {
    Surface s = unit_torus();
    auto t = find_involution(s);
    REQUIRE(t.has_value());
    REQUIRE_FALSE(t->retriangulated);
    REQUIRE(t->poly_img == std::vector<int>{0});
    REQUIRE(t->vshift == std::vector<int>{2});
    REQUIRE(t->c[0] == Vec2{1, 1});
    verify_involution(t->domain, *t);

    auto pts = weierstrass_points(s, *t);
    REQUIRE(pts.size() == 4);  // 2g+2, g=1
    expect_point(pts[0], 0, 0, 0, WeierstrassPoint::Kind::marked);  // lattice class
    expect_point(pts[1], 0, 0, Q(1, 2), WeierstrassPoint::Kind::regular);
    expect_point(pts[2], 0, Q(1, 2), 0, WeierstrassPoint::Kind::regular);
    expect_point(pts[3], 0, Q(1, 2), Q(1, 2), WeierstrassPoint::Kind::regular);
    REQUIRE(pts[0].vclass >= 0);
    REQUIRE(pts[1].vclass == -1);

    auto alg = algebraic_involutions(s);
    REQUIRE(alg.size() == 1);
    REQUIRE(alg[0].fixed == 4);
}

TEST_CASE("involution: L origami has the central symmetry with six fixed points") {
    Surface s = l_origami();
    auto t = find_involution(s);
    REQUIRE(t.has_value());
    REQUIRE_FALSE(t->retriangulated);
    // every square is centrally self-symmetric here: sigma = id
    REQUIRE(t->poly_img == std::vector<int>{0, 1, 2});
    REQUIRE(t->vshift == std::vector<int>{2, 2, 2});
    for (const Vec2& c : t->c) REQUIRE(c == Vec2{1, 1});

    auto pts = weierstrass_points(s, *t);
    REQUIRE(pts.size() == 6);  // 2g+2, g=2
    expect_point(pts[0], 0, 0, 0, WeierstrassPoint::Kind::cone);
    expect_point(pts[1], 0, Q(1, 2), Q(1, 2), WeierstrassPoint::Kind::regular);
    expect_point(pts[2], 1, Q(1, 2), 0, WeierstrassPoint::Kind::regular);
    expect_point(pts[3], 1, Q(1, 2), Q(1, 2), WeierstrassPoint::Kind::regular);
    expect_point(pts[4], 2, 0, Q(1, 2), WeierstrassPoint::Kind::regular);
    expect_point(pts[5], 2, Q(1, 2), Q(1, 2), WeierstrassPoint::Kind::regular);
    Census c = census(pts);
    REQUIRE(c.cone == 1);
    REQUIRE(c.regular == 5);

    // exhaustive correspondence search at n=3 agrees
    auto alg = algebraic_involutions(s);
    REQUIRE(alg.size() == 1);
    REQUIRE(alg[0].sig == std::vector<int>{0, 1, 2});
    REQUIRE(alg[0].fixed == 6);

    // point map spot checks
    SurfaceInfo info(t->domain);
    SurfacePoint img = involution_image(info, *t, {0, {Q(1, 4), Q(1, 3)}});
    REQUIRE(img == SurfacePoint{0, {Q(3, 4), Q(2, 3)}});
    REQUIRE(involution_image(info, *t, pts[0].at) == pts[0].at);
    REQUIRE(involution_image(info, *t, pts[4].at) == pts[4].at);
}

TEST_CASE("involution: two-square torus swaps its two lattice marks") {
    Surface s = two_square_torus();
    auto t = find_involution(s);
    REQUIRE(t.has_value());
    REQUIRE_FALSE(t->retriangulated);
    REQUIRE(t->poly_img == std::vector<int>{0, 1});
    REQUIRE(t->vshift == std::vector<int>{2, 2});

    auto pts = weierstrass_points(s, *t);
    REQUIRE(pts.size() == 4);
    expect_point(pts[0], 0, Q(1, 2), 0, WeierstrassPoint::Kind::regular);
    expect_point(pts[1], 0, Q(1, 2), Q(1, 2), WeierstrassPoint::Kind::regular);
    expect_point(pts[2], 1, Q(1, 2), 0, WeierstrassPoint::Kind::regular);
    expect_point(pts[3], 1, Q(1, 2), Q(1, 2), WeierstrassPoint::Kind::regular);

    // the two marked lattice classes are exchanged, not fixed
    REQUIRE(s.marks.size() == 2);
    SurfaceInfo info(t->domain);
    REQUIRE(involution_image(info, *t, s.marks[0].at) == s.marks[1].at);
    REQUIRE(involution_image(info, *t, s.marks[1].at) == s.marks[0].at);

    auto alg = algebraic_involutions(s);
    REQUIRE_FALSE(alg.empty());
    for (const auto& a : alg) REQUIRE(a.fixed == 4);
}

TEST_CASE("involution: two-triangle torus maps one triangle onto the other") {
    Surface s = two_triangle_torus();
    auto t = find_involution(s);
    REQUIRE(t.has_value());
    REQUIRE_FALSE(t->retriangulated);
    REQUIRE(t->poly_img == std::vector<int>{1, 0});
    REQUIRE(t->vshift == std::vector<int>{1, 2});
    REQUIRE(t->c[0] == Vec2{1, 1});
    REQUIRE(t->c[1] == Vec2{1, 1});

    auto pts = weierstrass_points(s, *t);
    REQUIRE(pts.size() == 4);
    expect_point(pts[0], 0, 0, 0, WeierstrassPoint::Kind::regular);  // unmarked flat vertex
    expect_point(pts[1], 0, Q(1, 2), 0, WeierstrassPoint::Kind::regular);
    expect_point(pts[2], 0, Q(1, 2), Q(1, 2), WeierstrassPoint::Kind::regular);
    expect_point(pts[3], 0, 1, Q(1, 2), WeierstrassPoint::Kind::regular);
    REQUIRE(pts[0].vclass >= 0);
}

TEST_CASE("involution: asymmetric hexagon torus falls back to the lattice form") {
    Surface s = hexagon_torus();
    auto t = find_involution(s);
    REQUIRE(t.has_value());
    REQUIRE(t->retriangulated);
    // domain is the Hermite-form parallelogram of the period lattice <(2,0),(0,1)>
    REQUIRE(serialize_flatsurf(t->domain) ==
            "format: flatsurf/1\n"
            "kind: translation\n"
            "polygon c0: (0,0) (2,0) (2,1) (0,1)\n"
            "glue c0.e0 c0.e2\n"
            "glue c0.e1 c0.e3\n");
    REQUIRE(t->poly_img == std::vector<int>{0});
    REQUIRE(t->vshift == std::vector<int>{2});
    REQUIRE(t->c[0] == Vec2{2, 1});

    auto pts = weierstrass_points(s, *t);
    REQUIRE(pts.size() == 4);
    expect_point(pts[0], 0, 0, 0, WeierstrassPoint::Kind::regular);
    expect_point(pts[1], 0, 0, Q(1, 2), WeierstrassPoint::Kind::regular);
    expect_point(pts[2], 0, 1, 0, WeierstrassPoint::Kind::regular);
    expect_point(pts[3], 0, 1, Q(1, 2), WeierstrassPoint::Kind::regular);
}

TEST_CASE("involution: torus with a vertex mark and a center mark fixes both") {
    Surface s = marked_torus("mark c0 (0,0) label=a\nmark c0 (1/2,1/2) label=b\n");
    auto t = find_involution(s);
    REQUIRE(t.has_value());
    REQUIRE_FALSE(t->retriangulated);

    auto pts = weierstrass_points(s, *t);
    REQUIRE(pts.size() == 4);
    expect_point(pts[0], 0, 0, 0, WeierstrassPoint::Kind::marked);
    expect_point(pts[1], 0, 0, Q(1, 2), WeierstrassPoint::Kind::regular);
    expect_point(pts[2], 0, Q(1, 2), 0, WeierstrassPoint::Kind::regular);
    expect_point(pts[3], 0, Q(1, 2), Q(1, 2), WeierstrassPoint::Kind::marked);
}

TEST_CASE("involution: swapped interior marks need the Delaunay presentation") {
    // z -> -z + (1, 1/2) exchanges the marks but moves the square off itself
    Surface s = marked_torus("mark c0 (1/4,1/4)\nmark c0 (3/4,1/4)\n");
    auto t = find_involution(s);
    REQUIRE(t.has_value());
    REQUIRE(t->retriangulated);

    auto pts = weierstrass_points(s, *t);
    REQUIRE(pts.size() == 4);
    Census c = census(pts);
    REQUIRE(c.cone == 0);
    REQUIRE(c.marked == 0);  // the marks are exchanged, never fixed
    REQUIRE(c.regular == 4);

    REQUIRE(t->domain.marks.size() == 2);
    SurfaceInfo info(t->domain);
    REQUIRE(involution_image(info, *t, t->domain.marks[0].at) == t->domain.marks[1].at);
    REQUIRE(involution_image(info, *t, t->domain.marks[1].at) == t->domain.marks[0].at);

    // auto-assigned labels differ between the two marks; the swap is still an
    // involution because labels do not pin marked points
    REQUIRE(t->domain.marks[0].label != t->domain.marks[1].label);
}

TEST_CASE("involution: single interior mark is fixed on the rebuilt presentation") {
    Surface s = marked_torus("mark c0 (1/3,1/7)\n");
    auto t = find_involution(s);
    REQUIRE(t.has_value());
    REQUIRE(t->retriangulated);
    auto pts = weierstrass_points(s, *t);
    REQUIRE(pts.size() == 4);
    Census c = census(pts);
    REQUIRE(c.marked == 1);
    REQUIRE(c.regular == 3);
}

TEST_CASE("involution: hyperelliptic five-square surface with a single order-4 zero") {
    Surface s = h4_hyperelliptic();
    REQUIRE(validate(s).stratum->str() == "H(4)");
    auto t = find_involution(s);
    REQUIRE(t.has_value());
    REQUIRE_FALSE(t->retriangulated);
    REQUIRE(t->vshift == std::vector<int>{2, 2, 2, 2, 2});
    for (const Vec2& c : t->c) REQUIRE(c == Vec2{1, 1});

    auto pts = weierstrass_points(s, *t);
    REQUIRE(pts.size() == 8);  // 2g+2, g=3
    Census c = census(pts);
    REQUIRE(c.cone == 1);  // the order-4 zero is a fixed point
    REQUIRE(c.regular == 7);

    auto alg = algebraic_involutions(s);
    REQUIRE(alg.size() == 1);
    REQUIRE(alg[0].sig == t->poly_img);
    REQUIRE(alg[0].sig == std::vector<int>{0, 1, 2, 4, 3});
    REQUIRE(alg[0].fixed == 8);
}

TEST_CASE("involution: a symmetry with a genus-one quotient is not hyperelliptic") {
    Surface s = h4_symmetric_over_torus();
    REQUIRE(validate(s).stratum->str() == "H(4)");
    auto alg = algebraic_involutions(s);
    REQUIRE(alg.size() == 1);  // the symmetry is genuinely there ...
    REQUIRE(alg[0].sig == std::vector<int>{1, 0, 3, 2, 4});
    REQUIRE(alg[0].fixed == 4);  // ... but 2g+2-4h = 4 means quotient genus 1
    REQUIRE_FALSE(find_involution(s).has_value());
}

TEST_CASE("involution: generic five-square surface in H(4) has none") {
    Surface s = h4_odd();
    REQUIRE(validate(s).stratum->str() == "H(4)");
    REQUIRE(algebraic_involutions(s).empty());  // exhaustive cross-check
    REQUIRE_FALSE(find_involution(s).has_value());
}

TEST_CASE("involution: H(1,1) surface exchanges its two zeros") {
    Surface s = h11_origami();
    REQUIRE(validate(s).stratum->str() == "H(1,1)");
    auto t = find_involution(s);
    REQUIRE(t.has_value());
    auto pts = weierstrass_points(s, *t);
    REQUIRE(pts.size() == 6);  // 2g+2, g=2
    Census c = census(pts);
    REQUIRE(c.cone == 0);  // both zeros are swapped, not fixed
    REQUIRE(c.regular == 6);

    auto alg = algebraic_involutions(s);
    bool found = false;
    for (const auto& a : alg)
        if (a.sig == t->poly_img) found = true;
    REQUIRE(found);
}

TEST_CASE("involution: non-convex L polygon presentation is retriangulated") {
    Surface s = l_polygon();
    auto t = find_involution(s);
    REQUIRE(t.has_value());
    REQUIRE(t->retriangulated);
    auto pts = weierstrass_points(s, *t);
    REQUIRE(pts.size() == 6);
    Census c = census(pts);
    REQUIRE(c.cone == 1);
    REQUIRE(c.regular == 5);

    // the involution found on the square-tiled presentation of the same
    // surface accepts this presentation too, and vice versa
    auto t2 = find_involution(l_origami());
    REQUIRE(weierstrass_points(l_origami(), *t).size() == 6);
    REQUIRE(weierstrass_points(s, *t2).size() == 6);
}

TEST_CASE("involution: search is deterministic") {
    for (auto make : {l_polygon, h4_hyperelliptic, two_triangle_torus}) {
        auto a = find_involution(make());
        auto b = find_involution(make());
        REQUIRE(a.has_value());
        REQUIRE(b.has_value());
        REQUIRE(a->retriangulated == b->retriangulated);
        REQUIRE(a->poly_img == b->poly_img);
        REQUIRE(a->vshift == b->vshift);
        REQUIRE(a->c.size() == b->c.size());
        for (size_t i = 0; i < a->c.size(); ++i) REQUIRE(a->c[i] == b->c[i]);
        REQUIRE(serialize_flatsurf(a->domain) == serialize_flatsurf(b->domain));
    }
}

TEST_CASE("involution: errors") {
    // half-translation input is outside the contract
    try {
        find_involution(pillowcase());
        FAIL("expected a domain error");
    } catch (const Error& e) {
        REQUIRE(e.kind == "domain");
    }

    // corrupted reflection center
    auto t = find_involution(l_origami());
    REQUIRE(t.has_value());
    Involution bad = *t;
    bad.c[0] = Vec2{2, 1};
    try {
        verify_involution(bad.domain, bad);
        FAIL("expected a domain error");
    } catch (const Error& e) {
        REQUIRE(e.kind == "domain");
    }

    // swapping two squares satisfies the horizontal wiring but not the vertical
    Involution swapped = *t;
    swapped.poly_img = {1, 0, 2};
    try {
        verify_involution(swapped.domain, swapped);
        FAIL("expected a domain error");
    } catch (const Error& e) {
        REQUIRE(e.kind == "domain");
    }

    // involution of a different surface
    try {
        weierstrass_points(unit_torus(), *t);
        FAIL("expected a domain error");
    } catch (const Error& e) {
        REQUIRE(e.kind == "domain");
    }

    // retriangulated involution offered a surface with different marks
    auto tm = find_involution(marked_torus("mark c0 (1/4,1/4)\nmark c0 (3/4,1/4)\n"));
    REQUIRE(tm.has_value());
    REQUIRE(tm->retriangulated);
    try {
        weierstrass_points(two_square_torus(), *tm);
        FAIL("expected a domain error");
    } catch (const Error& e) {
        REQUIRE(e.kind == "domain");
    }
}
